//! Small floating-point helpers: compensated summation and an optional
//! double-double accumulator for the limit dynamic program.

/// Kahan compensated accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct Kahan {
    sum: f64,
    comp: f64,
}

impl Kahan {
    pub fn new() -> Self {
        Kahan::default()
    }

    pub fn add(&mut self, x: f64) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn sum(&self) -> f64 {
        self.sum
    }
}

/// Probability accumulator abstraction: plain `f64` by default, an
/// error-compensated pair in extended-precision mode.
pub trait Accum: Copy {
    fn one() -> Self;
    fn add(&mut self, rhs: Self);
    fn mul_f64(self, w: f64) -> Self;
    fn to_f64(self) -> f64;
}

impl Accum for f64 {
    fn one() -> Self {
        1.0
    }
    fn add(&mut self, rhs: Self) {
        *self += rhs;
    }
    fn mul_f64(self, w: f64) -> Self {
        self * w
    }
    fn to_f64(self) -> f64 {
        self
    }
}

/// Unevaluated sum of two floats (double-double), enough head-room to make
/// state-merge rounding invisible at the tolerances checked here.
#[derive(Clone, Copy, Debug)]
pub struct TwoFloat {
    hi: f64,
    lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

impl Accum for TwoFloat {
    fn one() -> Self {
        TwoFloat { hi: 1.0, lo: 0.0 }
    }

    fn add(&mut self, rhs: Self) {
        let (s, e) = two_sum(self.hi, rhs.hi);
        let lo = e + self.lo + rhs.lo;
        let (hi, lo) = two_sum(s, lo);
        *self = TwoFloat { hi, lo };
    }

    fn mul_f64(self, w: f64) -> Self {
        let p = self.hi * w;
        let err = self.hi.mul_add(w, -p) + self.lo * w;
        let (hi, lo) = two_sum(p, err);
        TwoFloat { hi, lo }
    }

    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}
