//! Pairwise prior functions.
//!
//! A prior `g` assigns a cost to the signed label difference across an edge.
//! All shipped priors are convex on `[-T, T]` and flat or concave beyond,
//! which makes the full problem NP-hard. Each prior carries a companion
//! convex surrogate `h` (the generalized Huber function): `h = g` on
//! `[-T, T]`, `h >= g` everywhere, and `h` is linear beyond the threshold,
//! so its second differences vanish for `|a| > T`. That vanishing is what
//! keeps the layered min-cut graphs sparse.

use crate::error::{Error, Result};

/// Tolerance for discrete-convexity and flatness checks on prior tables.
pub const PRIOR_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PriorKind {
    TruncatedLinear,
    TruncatedQuadratic,
    Cauchy,
    TabulatedConvexPart,
}

impl PriorKind {
    /// Short name used by instance files and CLI flags.
    pub fn name(self) -> &'static str {
        match self {
            PriorKind::TruncatedLinear => "tl",
            PriorKind::TruncatedQuadratic => "tq",
            PriorKind::Cauchy => "cauchy",
            PriorKind::TabulatedConvexPart => "table",
        }
    }

    pub fn parse(s: &str) -> Option<PriorKind> {
        match s {
            "tl" | "truncated_linear" => Some(PriorKind::TruncatedLinear),
            "tq" | "truncated_quadratic" => Some(PriorKind::TruncatedQuadratic),
            "cauchy" => Some(PriorKind::Cauchy),
            _ => None,
        }
    }
}

/// A pairwise prior `g` with truncation threshold `T`, tabulated together
/// with its convex surrogate `h` over every label difference a model with
/// `label_count` labels can produce.
#[derive(Debug, Clone)]
pub struct Prior {
    kind: PriorKind,
    trunc: usize,
    label_count: usize,
    /// g and h tabulated at a = -(l-1) ..= l-1; index = a + l - 1.
    g: Vec<f64>,
    h: Vec<f64>,
    truncated_flat: bool,
}

impl Prior {
    /// Builds one of the named priors.
    ///
    /// `trunc` is the convexity threshold T >= 1; `label_count` fixes the
    /// tabulated range of differences.
    pub fn make(kind: PriorKind, trunc: usize, label_count: usize) -> Result<Prior> {
        if trunc < 1 {
            return Err(Error::InvalidModel("truncation threshold must be >= 1".into()));
        }
        if label_count < 2 {
            return Err(Error::InvalidModel("label count must be >= 2".into()));
        }
        if kind == PriorKind::TabulatedConvexPart {
            return Err(Error::InvalidModel(
                "tabulated priors are built with Prior::from_convex_table".into(),
            ));
        }
        let t = trunc as f64;
        let span = label_count as isize - 1;
        let g: Vec<f64> = (-span..=span)
            .map(|a| {
                let x = a as f64;
                match kind {
                    PriorKind::TruncatedLinear => x.abs().min(t),
                    PriorKind::TruncatedQuadratic => (x * x).min(t * t),
                    PriorKind::Cauchy => t * t / 2.0 * (1.0 + (x / t) * (x / t)).ln(),
                    PriorKind::TabulatedConvexPart => unreachable!(),
                }
            })
            .collect();
        let h: Vec<f64> = (-span..=span)
            .map(|a| {
                let x = a as f64;
                match kind {
                    PriorKind::TruncatedLinear => x.abs(),
                    // h continues the quadratic with slope 2T past the
                    // threshold: h(x) = 2T|x| - T^2 for |x| > T.
                    PriorKind::TruncatedQuadratic => {
                        if a.unsigned_abs() <= trunc {
                            x * x
                        } else {
                            2.0 * t * x.abs() - t * t
                        }
                    }
                    // No closed form for the Cauchy surrogate; filled in
                    // below by the table extension.
                    PriorKind::Cauchy => 0.0,
                    PriorKind::TabulatedConvexPart => unreachable!(),
                }
            })
            .collect();
        let h = if kind == PriorKind::Cauchy { extend_convex_part(&g, trunc, label_count) } else { h };
        let truncated_flat = matches!(
            kind,
            PriorKind::TruncatedLinear | PriorKind::TruncatedQuadratic
        );
        let prior = Prior { kind, trunc, label_count, g, h, truncated_flat };
        prior.check_tables()?;
        Ok(prior)
    }

    /// Builds a prior from an explicit table of g values at
    /// a = -(l-1) ..= l-1. The surrogate h extends g linearly beyond +-T
    /// with the boundary slope taken from the table.
    pub fn from_convex_table(g: Vec<f64>, trunc: usize, label_count: usize) -> Result<Prior> {
        if trunc < 1 || label_count < 2 {
            return Err(Error::InvalidModel("need T >= 1 and l >= 2".into()));
        }
        let span = label_count - 1;
        if g.len() != 2 * span + 1 {
            return Err(Error::DimensionMismatch(format!(
                "table has {} entries, expected {}",
                g.len(),
                2 * span + 1
            )));
        }
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidModel("prior table entries must be finite".into()));
        }
        let idx = |a: isize| (a + span as isize) as usize;
        let tt = trunc.min(span) as isize;
        let h = extend_convex_part(&g, trunc, label_count);
        let flat = (tt..=span as isize).all(|a| {
            (g[idx(a)] - g[idx(tt)]).abs() <= PRIOR_TOL
                && (g[idx(-a)] - g[idx(-tt)]).abs() <= PRIOR_TOL
        });
        let prior = Prior {
            kind: PriorKind::TabulatedConvexPart,
            trunc,
            label_count,
            g,
            h,
            truncated_flat: flat,
        };
        prior.check_tables()?;
        Ok(prior)
    }

    fn check_tables(&self) -> Result<()> {
        let span = self.span();
        let t = self.trunc.min(span as usize) as isize;
        // g must be discretely convex strictly inside [-T, T].
        for a in (-t + 1)..t {
            if 2.0 * self.g(a) > self.g(a - 1) + self.g(a + 1) + PRIOR_TOL {
                return Err(Error::NonConvexPrior(format!(
                    "g fails the convexity test at a = {a}"
                )));
            }
        }
        // Condition on the surrogate: h >= g, h = g on [-T, T], h convex.
        for a in -span..=span {
            if self.h(a) < self.g(a) - PRIOR_TOL {
                return Err(Error::NonConvexPrior(format!("h({a}) < g({a})")));
            }
            if a.abs() <= t && (self.h(a) - self.g(a)).abs() > PRIOR_TOL {
                return Err(Error::NonConvexPrior(format!("h({a}) != g({a}) inside threshold")));
            }
        }
        for a in (-span + 1)..span {
            if 2.0 * self.h(a) > self.h(a - 1) + self.h(a + 1) + PRIOR_TOL {
                return Err(Error::NonConvexPrior(format!(
                    "h fails the convexity test at a = {a}"
                )));
            }
        }
        Ok(())
    }

    pub fn kind(&self) -> PriorKind {
        self.kind
    }

    pub fn trunc(&self) -> usize {
        self.trunc
    }

    pub fn label_count(&self) -> usize {
        self.label_count
    }

    /// Largest tabulated difference, l - 1.
    pub fn span(&self) -> isize {
        self.label_count as isize - 1
    }

    /// True when g is constant at g(T) for |a| >= T. GSwapF relies on this
    /// to keep dropped-edge costs from rising; it refuses priors (Cauchy)
    /// where the flag is false.
    pub fn is_truncated_flat(&self) -> bool {
        self.truncated_flat
    }

    #[inline]
    fn idx(&self, a: isize) -> usize {
        let i = a + self.span();
        debug_assert!(i >= 0 && (i as usize) < self.g.len(), "difference {a} out of table range");
        i as usize
    }

    /// The true prior cost g(a) for a signed label difference.
    #[inline]
    pub fn g(&self, a: isize) -> f64 {
        self.g[self.idx(a)]
    }

    /// The convex surrogate h(a).
    #[inline]
    pub fn h(&self, a: isize) -> f64 {
        self.h[self.idx(a)]
    }

    /// Returns the table for the requested evaluation mode.
    #[inline]
    pub fn value(&self, mode: crate::energy::PriorMode, a: isize) -> f64 {
        match mode {
            crate::energy::PriorMode::G => self.g(a),
            crate::energy::PriorMode::H => self.h(a),
        }
    }

    /// Second difference h(a+1) - 2 h(a) + h(a-1).
    ///
    /// Nonnegative by convexity and exactly zero in the linear region
    /// |a| > T; the layered graph omits the corresponding arcs, which is
    /// where the O(l T) arc bound comes from.
    pub fn second_difference(&self, a: isize) -> Result<f64> {
        if a.abs() > self.span() - 1 {
            return Err(Error::ContractViolation(format!(
                "second difference at {a} needs table entries beyond the label span"
            )));
        }
        Ok(self.h(a + 1) - 2.0 * self.h(a) + self.h(a - 1))
    }
}

/// Extends a tabulated g linearly beyond +-T into a surrogate h.
///
/// The slope on each side is the smallest one that keeps h above g at every
/// tabulated point and keeps h convex across the joint: the larger of the
/// boundary increment of g's convex part and the steepest chord from the
/// threshold out to any farther table point. For truncated (flat) priors
/// that is the boundary increment; for the Cauchy, whose g keeps growing
/// past T, the chord to T+1 wins — the boundary increment alone would dip
/// below g there.
fn extend_convex_part(g: &[f64], trunc: usize, label_count: usize) -> Vec<f64> {
    let span = label_count as isize - 1;
    let idx = |a: isize| (a + span) as usize;
    let tt = trunc.min(label_count - 1) as isize;
    let mut h = g.to_vec();
    if tt >= span {
        return h;
    }
    let mut right_slope = g[idx(tt)] - g[idx(tt - 1)];
    let mut left_slope = g[idx(-tt)] - g[idx(-tt + 1)];
    for k in 1..=(span - tt) {
        right_slope = right_slope.max((g[idx(tt + k)] - g[idx(tt)]) / k as f64);
        left_slope = left_slope.max((g[idx(-tt - k)] - g[idx(-tt)]) / k as f64);
    }
    for a in (tt + 1)..=span {
        h[idx(a)] = g[idx(tt)] + right_slope * (a - tt) as f64;
        h[idx(-a)] = g[idx(-tt)] + left_slope * (a - tt) as f64;
    }
    h
}

/// Discrete convexity test: 2 f(a) <= f(a-1) + f(a+1) + tol at every
/// interior point of `table[lo..=hi]` (indices into `table`).
pub fn is_discretely_convex(table: &[f64], lo: usize, hi: usize, tol: f64) -> bool {
    assert!(hi < table.len() && lo <= hi, "range out of table bounds");
    (lo + 1..hi).all(|i| 2.0 * table[i] <= table[i - 1] + table[i + 1] + tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncated_quadratic_tables() {
        let p = Prior::make(PriorKind::TruncatedQuadratic, 3, 8).unwrap();
        assert_eq!(p.g(5), 9.0);
        assert_eq!(p.h(5), 21.0); // 2*3*5 - 9
        assert_eq!(p.g(-5), 9.0);
        assert_eq!(p.h(-5), 21.0);
        assert_eq!(p.g(2), 4.0);
        assert_eq!(p.h(2), 4.0);
        assert!(p.is_truncated_flat());
    }

    #[test]
    fn truncated_linear_huber_is_linear() {
        let p = Prior::make(PriorKind::TruncatedLinear, 4, 10).unwrap();
        for a in -9..=9isize {
            assert_eq!(p.h(a), (a as f64).abs());
            assert_eq!(p.g(a), (a as f64).abs().min(4.0));
        }
        assert!(p.is_truncated_flat());
    }

    #[test]
    fn cauchy_tables() {
        let p = Prior::make(PriorKind::Cauchy, 2, 6).unwrap();
        assert_eq!(p.g(0), 0.0);
        assert!((p.g(2) - 2.0 * 2.0_f64.ln()).abs() < 1e-12);
        // The extension slope is the steepest chord past T (the Cauchy
        // still grows there), so h touches g at T+1 and dominates beyond.
        assert!((p.h(3) - p.g(3)).abs() < 1e-12);
        for a in -5..=5isize {
            assert!(p.h(a) >= p.g(a) - 1e-12, "h({a}) < g({a})");
        }
        assert!((p.h(4) - (p.g(2) + 2.0 * (p.g(3) - p.g(2)))).abs() < 1e-12);
        assert!(!p.is_truncated_flat());
    }

    #[test]
    fn second_differences() {
        let p = Prior::make(PriorKind::TruncatedQuadratic, 3, 8).unwrap();
        assert_eq!(p.second_difference(0).unwrap(), 2.0);
        assert_eq!(p.second_difference(5).unwrap(), 0.0);
        assert_eq!(p.second_difference(-5).unwrap(), 0.0);
        let p = Prior::make(PriorKind::TruncatedLinear, 4, 8).unwrap();
        assert_eq!(p.second_difference(1).unwrap(), 0.0);
        // Out of range.
        assert!(p.second_difference(7).is_err());
    }

    #[test]
    fn discrete_convexity_table_test() {
        let quad: Vec<f64> = (-3..=3).map(|a: i32| (a * a) as f64).collect();
        assert!(is_discretely_convex(&quad, 0, 6, 0.0));
        let truncated: Vec<f64> = (-3..=3).map(|a: i32| ((a * a) as f64).min(4.0)).collect();
        // Fails at |a| = 2: 2*4 > 1 + 4.
        assert!(!is_discretely_convex(&truncated, 0, 6, 1e-9));
        let lin: Vec<f64> = (0..7).map(|a| a as f64).collect();
        assert!(is_discretely_convex(&lin, 0, 6, 0.0));
    }

    #[test]
    fn bad_table_rejected() {
        // Concave bump inside the claimed convex range.
        let g = vec![4.0, 0.0, 3.0, 0.0, 4.0];
        assert!(Prior::from_convex_table(g, 2, 3).is_err());
    }

    #[test]
    fn tabulated_quadratic_roundtrip() {
        let span = 5isize;
        let g: Vec<f64> = (-span..=span).map(|a| (a * a) as f64).collect();
        let p = Prior::from_convex_table(g, 5, 6).unwrap();
        for a in -5..=5isize {
            assert_eq!(p.h(a), (a * a) as f64);
            assert_eq!(p.g(a), (a * a) as f64);
        }
    }
}
