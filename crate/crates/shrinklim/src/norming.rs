//! Normalizing sequences `n -> r_n` for the two worked constructions, plus
//! explicit tabulated sequences.

use std::collections::{BTreeMap, HashMap};
use std::io::BufRead;
use std::sync::Mutex;

use crate::error::{Error, Result};
use crate::quad::bisect;

/// `k(x) = sqrt(2/pi) x^{-2} exp(-x^2/2)`, continuous and strictly
/// decreasing from infinity to zero on `(0, inf)`.
pub fn half_normal_k(x: f64) -> f64 {
    (2.0 / std::f64::consts::PI).sqrt() * x.powi(-2) * (-0.5 * x * x).exp()
}

#[derive(Debug, Clone)]
pub enum NormingRule {
    /// `exp(-lambda r_n) = a / n`, i.e. `r_n = ln(n/a) / lambda`; defined
    /// for `n > a`.
    ExponentialRule { a: f64, lambda: f64 },
    /// `r_n` solves `k(r_n) = c / n`.
    HalfNormalRule { c: f64 },
    /// Tabulated `n -> r_n`.
    Explicit { rs: BTreeMap<u64, f64> },
}

/// A normalizing sequence with a per-`n` cache of solved levels.
///
/// The cache only memoizes values that every reader would compute
/// identically, so concurrent cold reads are safe.
#[derive(Debug)]
pub struct NormalizingSequence {
    rule: NormingRule,
    cache: Mutex<HashMap<u64, f64>>,
}

impl NormalizingSequence {
    pub fn new(rule: NormingRule) -> Result<Self> {
        match &rule {
            NormingRule::ExponentialRule { a, lambda } => {
                if !(*a > 0.0) || !(*lambda > 0.0) {
                    return Err(Error::domain("exponential rule needs a > 0 and lambda > 0"));
                }
            }
            NormingRule::HalfNormalRule { c } => {
                if !(*c > 0.0) {
                    return Err(Error::domain("half-normal rule needs c > 0"));
                }
            }
            NormingRule::Explicit { rs } => {
                if rs.is_empty() {
                    return Err(Error::domain("explicit sequence is empty"));
                }
                if rs.values().any(|&r| !(r > 0.0)) {
                    return Err(Error::domain("explicit sequence needs r_n > 0"));
                }
            }
        }
        Ok(NormalizingSequence {
            rule,
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn exponential_rule(a: f64, lambda: f64) -> Result<Self> {
        Self::new(NormingRule::ExponentialRule { a, lambda })
    }

    pub fn half_normal_rule(c: f64) -> Result<Self> {
        Self::new(NormingRule::HalfNormalRule { c })
    }

    pub fn explicit(pairs: impl IntoIterator<Item = (u64, f64)>) -> Result<Self> {
        Self::new(NormingRule::Explicit {
            rs: pairs.into_iter().collect(),
        })
    }

    /// Load an explicit sequence from CSV with header `n,r`.
    pub fn from_csv<R: BufRead>(reader: R) -> Result<Self> {
        let mut pairs = BTreeMap::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.eq_ignore_ascii_case("n,r") {
                continue;
            }
            let mut parts = line.split(',');
            let n: u64 = parts
                .next()
                .map(str::trim)
                .ok_or_else(|| Error::Csv(format!("line {}: missing n", lineno + 1)))?
                .parse()
                .map_err(|e| Error::Csv(format!("line {}: {e}", lineno + 1)))?;
            let r: f64 = parts
                .next()
                .map(str::trim)
                .ok_or_else(|| Error::Csv(format!("line {}: missing r", lineno + 1)))?
                .parse()
                .map_err(|e| Error::Csv(format!("line {}: {e}", lineno + 1)))?;
            pairs.insert(n, r);
        }
        Self::explicit(pairs)
    }

    pub fn rule(&self) -> &NormingRule {
        &self.rule
    }

    /// The level `r_n`.
    pub fn r(&self, n: u64) -> Result<f64> {
        if let Some(&r) = self.cache.lock().unwrap().get(&n) {
            return Ok(r);
        }
        let r = self.solve(n)?;
        self.cache.lock().unwrap().insert(n, r);
        Ok(r)
    }

    /// The gap `w_n = r_{n+1} - r_n`.
    pub fn gap(&self, n: u64) -> Result<f64> {
        Ok(self.r(n + 1)? - self.r(n)?)
    }

    fn solve(&self, n: u64) -> Result<f64> {
        if n == 0 {
            return Err(Error::domain("n must be >= 1"));
        }
        match &self.rule {
            NormingRule::ExponentialRule { a, lambda } => {
                let nf = n as f64;
                if nf <= *a {
                    return Err(Error::domain(format!(
                        "exponential rule needs n > a (n = {n}, a = {a})"
                    )));
                }
                Ok((nf / a).ln() / lambda)
            }
            NormingRule::HalfNormalRule { c } => solve_half_normal(*c, n),
            NormingRule::Explicit { rs } => rs
                .get(&n)
                .copied()
                .ok_or_else(|| Error::domain(format!("n = {n} not in explicit sequence"))),
        }
    }
}

/// Root of `k(x) = c / n`: bracket grown geometrically from `[1e-6, 1]`,
/// then bisection. `k` is strictly decreasing so the root is unique.
fn solve_half_normal(c: f64, n: u64) -> Result<f64> {
    let target = c / n as f64;
    let f = |x: f64| half_normal_k(x) - target;
    let lo = 1e-6;
    if f(lo) <= 0.0 {
        // k(1e-6) ~ 1e12, only reachable for absurd c/n ratios
        return Err(Error::SolverFailure(format!(
            "k({lo}) already below target {target}"
        )));
    }
    let mut hi = 1.0;
    let mut doublings = 0;
    while f(hi) > 0.0 {
        hi *= 2.0;
        doublings += 1;
        if doublings > 200 {
            return Err(Error::SolverFailure(
                "bracket not established in 200 doublings".into(),
            ));
        }
    }
    bisect(f, lo, hi, 1e-12)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k_at_one() {
        // sqrt(2/pi) e^{-1/2}
        assert!((half_normal_k(1.0) - 0.483_941_449_038_286_7).abs() < 1e-14);
    }

    #[test]
    fn exponential_rule_values() {
        let seq = NormalizingSequence::exponential_rule(2.0, 1.0).unwrap();
        assert!((seq.r(200).unwrap() - 100.0f64.ln()).abs() < 1e-14);
        let seq2 = NormalizingSequence::exponential_rule(2.0, 2.0).unwrap();
        assert!((seq2.r(200).unwrap() - 100.0f64.ln() / 2.0).abs() < 1e-14);
    }

    #[test]
    fn exponential_rule_rejects_small_n() {
        let seq = NormalizingSequence::exponential_rule(1.0, 1.0).unwrap();
        assert!(seq.r(1).is_err());
        let seq2 = NormalizingSequence::exponential_rule(2.5, 1.0).unwrap();
        assert!(seq2.r(2).is_err());
        assert!(seq2.r(3).is_ok());
    }

    #[test]
    fn exponential_defining_equation_residual() {
        let (a, lambda) = (2.0, 1.0);
        let seq = NormalizingSequence::exponential_rule(a, lambda).unwrap();
        for n in [3u64, 10, 100, 10_000, 100_000] {
            let r = seq.r(n).unwrap();
            assert!(((-lambda * r).exp() - a / n as f64).abs() <= 1e-12);
        }
    }

    #[test]
    fn half_normal_rule_root() {
        let seq = NormalizingSequence::half_normal_rule(1.0).unwrap();
        let r = seq.r(100).unwrap();
        assert!((r - 2.321).abs() < 1e-3);
        // defining equation r^2 e^{r^2/2} = 100 sqrt(2/pi) to 1e-8
        let lhs = r * r * (0.5 * r * r).exp();
        let rhs = 100.0 * (2.0 / std::f64::consts::PI).sqrt();
        assert!((lhs - rhs).abs() < 1e-8 * rhs.max(1.0), "{lhs} vs {rhs}");
        // residual of n k(r) = c
        for n in [10u64, 100, 1_000, 10_000] {
            let r = seq.r(n).unwrap();
            assert!((n as f64 * half_normal_k(r) - 1.0).abs() <= 1e-8);
        }
    }

    #[test]
    fn sequences_increase_unbounded_on_range() {
        for seq in [
            NormalizingSequence::exponential_rule(2.0, 1.0).unwrap(),
            NormalizingSequence::half_normal_rule(1.0).unwrap(),
        ] {
            let mut prev = seq.r(10).unwrap();
            for n in 11..200u64 {
                let r = seq.r(n).unwrap();
                assert!(r > prev, "n={n}");
                prev = r;
            }
            assert!(seq.r(100_000).unwrap() > seq.r(10).unwrap() + 0.5);
        }
    }

    #[test]
    fn gaps_exponential_closed_form() {
        let lambda = 1.0;
        let seq = NormalizingSequence::exponential_rule(2.0, lambda).unwrap();
        let w100 = seq.gap(100).unwrap();
        assert!((w100 - (101.0f64 / 100.0).ln()).abs() < 1e-12);
        for n in [10u64, 100, 1000, 10_000] {
            let expected = (1.0 + 1.0 / n as f64).ln() / lambda;
            assert!((seq.gap(n).unwrap() - expected).abs() <= 1e-12);
        }
    }

    #[test]
    fn gaps_explicit_and_half_normal() {
        let seq = NormalizingSequence::explicit((1..=20u64).map(|n| (n, n as f64))).unwrap();
        for n in 1..19u64 {
            assert_eq!(seq.gap(n).unwrap(), 1.0);
        }
        assert!(seq.r(21).is_err());

        let hn = NormalizingSequence::half_normal_rule(1.0).unwrap();
        let mut prev = hn.gap(10).unwrap();
        for n in [30u64, 100, 1_000, 10_000] {
            let w = hn.gap(n).unwrap();
            assert!(w < prev && w > 0.0, "n={n}");
            prev = w;
        }
    }

    #[test]
    fn explicit_from_csv() {
        let text = "n,r\n1,0.5\n2,1.5\n";
        let seq = NormalizingSequence::from_csv(text.as_bytes()).unwrap();
        assert_eq!(seq.r(2).unwrap(), 1.5);
        assert!((seq.gap(1).unwrap() - 1.0).abs() < 1e-15);
    }
}
