/// Neumaier-compensated accumulator.
///
/// `hi` carries the rounded running sum and `lo` the exact rounding error of
/// every addition, so `hi + lo` is the sum of the inputs to within a few
/// units of `eps^2` relative. Two accumulators merge without losing that
/// property, which is what lets chunked sums agree with a single pass.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    hi: f64,
    lo: f64,
}

impl CompensatedSum {
    pub const fn new() -> Self {
        CompensatedSum { hi: 0.0, lo: 0.0 }
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.hi + x;
        if self.hi.abs() >= x.abs() {
            self.lo += (self.hi - t) + x;
        } else {
            self.lo += (x - t) + self.hi;
        }
        self.hi = t;
    }

    /// Folds another accumulator in, high part first.
    #[inline]
    pub fn merge(&mut self, other: &CompensatedSum) {
        self.add(other.hi);
        self.add(other.lo);
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.hi + self.lo
    }

    pub fn parts(&self) -> (f64, f64) {
        (self.hi, self.lo)
    }
}

impl Extend<f64> for CompensatedSum {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for x in iter {
            self.add(x);
        }
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        acc.extend(iter);
        acc
    }
}
