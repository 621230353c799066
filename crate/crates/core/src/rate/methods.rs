use super::mgf::{rate_at_zero_closed, rate_at_zero_numeric};
use crate::env::ProbVec;
use crate::error::Result;

/// A way of computing the single-site rate at the origin.
pub trait RateAtZero: Send + Sync {
    fn name(&self) -> &'static str;
    fn rate(&self, sigma: &ProbVec) -> Result<f64>;
}

pub struct ClosedForm;

impl RateAtZero for ClosedForm {
    fn name(&self) -> &'static str {
        "closed"
    }

    fn rate(&self, sigma: &ProbVec) -> Result<f64> {
        rate_at_zero_closed(sigma)
    }
}

pub struct NumericDescent;

impl RateAtZero for NumericDescent {
    fn name(&self) -> &'static str {
        "numeric"
    }

    fn rate(&self, sigma: &ProbVec) -> Result<f64> {
        rate_at_zero_numeric(sigma)
    }
}

pub fn rate_methods() -> Vec<Box<dyn RateAtZero>> {
    vec![Box::new(ClosedForm), Box::new(NumericDescent)]
}

pub fn rate_method(name: &str) -> Option<Box<dyn RateAtZero>> {
    rate_methods().into_iter().find(|m| m.name() == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_lookup() {
        assert_eq!(rate_method("closed").unwrap().name(), "closed");
        assert!(rate_method("bogus").is_none());
        let s = ProbVec::new(vec![0.8, 0.2]).unwrap();
        let vals: Vec<f64> = rate_methods().iter().map(|m| m.rate(&s).unwrap()).collect();
        assert!((vals[0] - vals[1]).abs() < 1e-10);
    }
}
