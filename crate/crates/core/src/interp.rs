//! Piecewise-linear interpolation over strictly increasing knots, no
//! extrapolation.

/// Why a knot table was rejected.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum KnotError {
    Empty,
    LengthMismatch,
    NonFinite { index: usize },
    NotIncreasing { index: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Knots {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl Knots {
    pub(crate) fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self, KnotError> {
        if xs.is_empty() {
            return Err(KnotError::Empty);
        }
        if xs.len() != ys.len() {
            return Err(KnotError::LengthMismatch);
        }
        for (i, (&x, &y)) in xs.iter().zip(&ys).enumerate() {
            if !x.is_finite() || !y.is_finite() {
                return Err(KnotError::NonFinite { index: i });
            }
            if i > 0 && x <= xs[i - 1] {
                return Err(KnotError::NotIncreasing { index: i });
            }
        }
        Ok(Self { xs, ys })
    }

    pub(crate) fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub(crate) fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub(crate) fn domain(&self) -> (f64, f64) {
        (self.xs[0], self.xs[self.xs.len() - 1])
    }

    pub(crate) fn contains(&self, x: f64) -> bool {
        let (lo, hi) = self.domain();
        x >= lo && x <= hi
    }

    /// `None` outside the knot domain. Exact at knots.
    pub(crate) fn eval(&self, x: f64) -> Option<f64> {
        if !self.contains(x) {
            return None;
        }
        // first knot strictly greater than x
        let upper = self.xs.partition_point(|&k| k <= x);
        if upper == 0 {
            return None;
        }
        let i = upper - 1;
        if self.xs[i] == x || i + 1 == self.xs.len() {
            return Some(self.ys[i]);
        }
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        let t = (x - x0) / (x1 - x0);
        Some(y0 + t * (y1 - y0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_bad_tables() {
        assert_eq!(Knots::new(vec![], vec![]), Err(KnotError::Empty));
        assert_eq!(
            Knots::new(vec![0.0, 1.0], vec![1.0]),
            Err(KnotError::LengthMismatch)
        );
        assert_eq!(
            Knots::new(vec![0.2, 0.1], vec![1.0, 1.0]),
            Err(KnotError::NotIncreasing { index: 1 })
        );
        assert_eq!(
            Knots::new(vec![0.0, f64::NAN], vec![1.0, 1.0]),
            Err(KnotError::NonFinite { index: 1 })
        );
    }

    #[test]
    fn single_knot() {
        let k = Knots::new(vec![0.5], vec![2.0]).unwrap();
        assert_eq!(k.eval(0.5), Some(2.0));
        assert_eq!(k.eval(0.50001), None);
    }

    #[test]
    fn midpoint_and_bounds() {
        let k = Knots::new(vec![0.1, 0.2], vec![1.0002, 1.00045]).unwrap();
        let mid = k.eval(0.15).unwrap();
        assert!((mid - 1.000325).abs() < 1e-12);
        assert_eq!(k.eval(0.2), Some(1.00045));
        assert_eq!(k.eval(0.0999), None);
    }

    proptest! {
        #[test]
        fn bounded_by_neighbours(ys in proptest::collection::vec(-5.0f64..5.0, 2..12), t in 0.0f64..1.0) {
            let xs: Vec<f64> = (0..ys.len()).map(|i| i as f64 * 0.1).collect();
            let k = Knots::new(xs.clone(), ys.clone()).unwrap();
            for (x, y) in xs.iter().zip(&ys) {
                prop_assert_eq!(k.eval(*x), Some(*y));
            }
            for i in 0..xs.len() - 1 {
                let x = xs[i] + t * (xs[i + 1] - xs[i]);
                let v = k.eval(x).unwrap();
                let lo = ys[i].min(ys[i + 1]) - 1e-12;
                let hi = ys[i].max(ys[i + 1]) + 1e-12;
                prop_assert!(v >= lo && v <= hi);
            }
        }
    }
}
