//! Compensated accumulation used by every long sum in the crate.

/// Running sum carrying its own rounding error.
///
/// Each `add` runs an error-free transformation (Knuth's two-sum), so the
/// pair `(sum, compensation)` represents the exact running total to roughly
/// twice working precision regardless of how many terms went in. `value`
/// folds the compensation back into a single f64.
///
/// Two sums over disjoint data can be combined with [`merge`]; the result is
/// as accurate as having accumulated everything into one sum, which is what
/// makes partial fits combinable.
///
/// [`merge`]: CompensatedSum::merge
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, term: f64) {
        let (s, e) = two_sum(self.sum, term);
        self.sum = s;
        self.compensation += e;
    }

    /// Fold another partial sum into this one.
    pub fn merge(&mut self, other: CompensatedSum) {
        let (s, e) = two_sum(self.sum, other.sum);
        self.sum = s;
        self.compensation += e + other.compensation;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Returns `(s, e)` with `s = fl(a + b)` and `s + e = a + b` exactly.
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let a_round = s - b;
    let b_round = s - a_round;
    let e = (a - a_round) + (b - b_round);
    (s, e)
}
