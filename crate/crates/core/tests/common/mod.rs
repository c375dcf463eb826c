//! Shared test oracles, independent of the library's implementation paths.

/// Double-double (~31 significant digits) arithmetic, enough to sum the J0
/// power series through its ~3e19 peak terms at x = 50 with ~1e-12 absolute
/// error left over.
#[derive(Clone, Copy, Debug)]
pub struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    pub fn from(v: f64) -> Self {
        Dd { hi: v, lo: 0.0 }
    }

    pub fn value(self) -> f64 {
        self.hi + self.lo
    }

    fn two_sum(a: f64, b: f64) -> Dd {
        let s = a + b;
        let bb = s - a;
        let err = (a - (s - bb)) + (b - bb);
        Dd { hi: s, lo: err }
    }

    fn two_prod(a: f64, b: f64) -> Dd {
        let p = a * b;
        let err = a.mul_add(b, -p);
        Dd { hi: p, lo: err }
    }

    pub fn add(self, other: Dd) -> Dd {
        let s = Dd::two_sum(self.hi, other.hi);
        let lo = s.lo + self.lo + other.lo;
        let r = Dd::two_sum(s.hi, lo);
        Dd { hi: r.hi, lo: r.lo }
    }

    pub fn mul(self, other: Dd) -> Dd {
        let p = Dd::two_prod(self.hi, other.hi);
        let lo = p.lo + self.hi * other.lo + self.lo * other.hi;
        let r = Dd::two_sum(p.hi, lo);
        Dd { hi: r.hi, lo: r.lo }
    }

    pub fn div_f64(self, d: f64) -> Dd {
        let q1 = self.hi / d;
        // Remainder computed in double-double: self - q1 * d.
        let p = Dd::two_prod(q1, d);
        let r_hi = self.hi - p.hi;
        let r_lo = self.lo - p.lo;
        let q2 = (r_hi + r_lo) / d;
        let r = Dd::two_sum(q1, q2);
        Dd { hi: r.hi, lo: r.lo }
    }

    pub fn abs(self) -> f64 {
        self.value().abs()
    }
}

/// J0 by its power series `sum_k (-x^2/4)^k / (k!)^2`, summed in
/// double-double precision. Valid over the tested span [0, 50]; absolute
/// error there is bounded by ~3e19 * 1e-31 ~ 3e-12.
pub fn j0_series_oracle(x: f64) -> f64 {
    let x2 = Dd::two_prod(x, x);
    let q = x2.div_f64(-4.0);
    let mut term = Dd::from(1.0);
    let mut sum = Dd::from(1.0);
    for k in 1..=220u32 {
        term = term.mul(q).div_f64((k as u64 * k as u64) as f64);
        sum = sum.add(term);
        if term.abs() < 1e-26 {
            break;
        }
    }
    sum.value()
}

/// First positive zero of J0, located by bisection on the series oracle.
pub fn j0_first_zero_oracle() -> f64 {
    let (mut lo, mut hi) = (2.0f64, 3.0f64);
    assert!(j0_series_oracle(lo) > 0.0 && j0_series_oracle(hi) < 0.0);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if j0_series_oracle(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
