//! Minimal double-double arithmetic, used where an oracle must resolve a
//! cancellation below the f64 roundoff floor (near-zero band elements).

/// Unevaluated sum hi + lo with |lo| <= ulp(hi)/2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> Dd {
    let hi = a + b;
    let v = hi - a;
    let lo = (a - (hi - v)) + (b - v);
    Dd { hi, lo }
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> Dd {
    // Requires |a| >= |b|.
    let hi = a + b;
    let lo = b - (hi - a);
    Dd { hi, lo }
}

#[inline]
fn two_prod(a: f64, b: f64) -> Dd {
    let hi = a * b;
    let lo = a.mul_add(b, -hi);
    Dd { hi, lo }
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    #[inline]
    pub fn from_f64(v: f64) -> Dd {
        Dd { hi: v, lo: 0.0 }
    }

    /// Exact difference of two f64 values.
    #[inline]
    pub fn sub_f64(a: f64, b: f64) -> Dd {
        two_sum(a, -b)
    }

    #[inline]
    pub fn add(self, other: Dd) -> Dd {
        let s = two_sum(self.hi, other.hi);
        let lo = s.lo + self.lo + other.lo;
        quick_two_sum(s.hi, lo)
    }

    #[inline]
    pub fn mul(self, other: Dd) -> Dd {
        let p = two_prod(self.hi, other.hi);
        let lo = p.lo + self.hi * other.lo + self.lo * other.hi;
        quick_two_sum(p.hi, lo)
    }

    #[inline]
    pub fn mul_f64(self, other: f64) -> Dd {
        let p = two_prod(self.hi, other);
        let lo = p.lo + self.lo * other;
        quick_two_sum(p.hi, lo)
    }

    #[inline]
    pub fn div_f64(self, d: f64) -> Dd {
        let q1 = self.hi / d;
        let r = self.add(Dd::from_f64(q1).mul_f64(-d));
        let q2 = (r.hi + r.lo) / d;
        quick_two_sum(q1, q2)
    }

    #[inline]
    pub fn div(self, d: Dd) -> Dd {
        let q1 = self.hi / d.hi;
        let r1 = self.add(d.mul_f64(-q1));
        let q2 = r1.hi / d.hi;
        let r2 = r1.add(d.mul_f64(-q2));
        let q3 = r2.hi / d.hi;
        quick_two_sum(q1, q2).add(Dd::from_f64(q3))
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}
