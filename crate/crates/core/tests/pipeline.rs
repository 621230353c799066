use rwre_core::env::{EnvironmentLaw, ProbVec};
use rwre_core::rate::solve_saddle;
use rwre_core::simulate::{decomposed_rwpe_run, occupation_check};
use rwre_core::strip::{optimal_strip_pipeline, strip_rate0, PipelineOptions};

fn flagship() -> EnvironmentLaw {
    let atoms = vec![
        ProbVec::new(vec![0.4, 0.1, 0.3, 0.2]).unwrap(),
        ProbVec::new(vec![0.1, 0.4, 0.3, 0.2]).unwrap(),
    ];
    EnvironmentLaw::uniform(atoms, 0.1).unwrap()
}

#[test]
fn flagship_strip_reaches_the_rate_and_its_walks_behave() {
    let law = flagship();
    let opts = PipelineOptions::default();
    let rep = optimal_strip_pipeline(&law, &opts).unwrap();
    assert!(rep.certified);
    let saddle = solve_saddle(law.atoms(), 1e-10).unwrap();
    assert!((rep.i0 + saddle.value).abs() < 1e-8, "{} vs {}", rep.i0, -saddle.value);
    assert!((rep.rate0 - rep.i0).abs() <= opts.epsilon, "{} vs {}", rep.rate0, rep.i0);

    // the reported rate is reproducible from the emitted geometry alone
    let (again, _) = strip_rate0(&rep.strip.spec, 1e-10).unwrap();
    assert!((again - rep.rate0).abs() < 1e-7);

    // the tilted walk drifts nowhere and spends the saddle fractions in each strip
    assert!(rep.tilted_drift_balance.iter().all(|b| b.abs() < 1e-6));
    let occ = occupation_check(&rep.tilted_strip, 200_000, 7, 0.05).unwrap();
    assert!(occ.pass, "{occ:?}");

    let t = rep.tilted_strip.targets.clone().unwrap();
    let dec = decomposed_rwpe_run(&rep.tilted_strip.spec, &t, 100_000, 0.1, 100, 11, 2).unwrap();
    assert!(dec.freq_ab >= 0.95, "{dec:?}");
}
