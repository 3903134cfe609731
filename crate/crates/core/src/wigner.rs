//! Clebsch-Gordan coefficients and Wigner 3j/6j symbols (Condon-Shortley phase).
//!
//! Racah sums are evaluated exactly: factorials are kept as prime exponent
//! vectors, the alternating sum is done in big integers, and the result is
//! converted to f64 once at the end.

use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// A half-integer stored as twice its value.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HalfInt(i64);

impl HalfInt {
    pub fn from_twice(t: i64) -> Self {
        Self(t)
    }

    pub fn new(x: f64) -> Result<Self> {
        let t = 2.0 * x;
        if !t.is_finite() || (t - t.round()).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!("{x} is not a half-integer")));
        }
        Ok(Self(t.round() as i64))
    }

    pub fn twice(self) -> i64 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }
}

impl From<i64> for HalfInt {
    fn from(n: i64) -> Self {
        Self(2 * n)
    }
}

struct Primes(Vec<u64>);

fn primes_upto(n: usize) -> Vec<u64> {
    let mut sieve = vec![true; n + 1];
    let mut out = Vec::new();
    for p in 2..=n {
        if sieve[p] {
            out.push(p as u64);
            let mut q = p * p;
            while q <= n {
                sieve[q] = false;
                q += p;
            }
        }
    }
    out
}

fn primes(n: usize) -> Vec<u64> {
    static CACHE: OnceLock<Primes> = OnceLock::new();
    let cached = CACHE.get_or_init(|| Primes(primes_upto(4096)));
    if n <= 4096 {
        cached
            .0
            .iter()
            .copied()
            .take_while(|&p| p as usize <= n)
            .collect()
    } else {
        primes_upto(n)
    }
}

/// A rational number as a signed exponent vector over the first primes.
#[derive(Clone, Debug)]
struct Factored(Vec<i64>);

impl Factored {
    fn one(len: usize) -> Self {
        Self(vec![0; len])
    }

    /// Multiply by (n!)^power using Legendre's formula.
    fn mul_factorial(&mut self, ps: &[u64], n: i64, power: i64) {
        debug_assert!(n >= 0);
        let n = n as u64;
        for (e, &p) in self.0.iter_mut().zip(ps) {
            if p > n {
                break;
            }
            let mut q = n / p;
            let mut s = 0;
            while q > 0 {
                s += q as i64;
                q /= p;
            }
            *e += power * s;
        }
    }

    fn mul_int(&mut self, ps: &[u64], mut n: u64, power: i64) {
        for (e, &p) in self.0.iter_mut().zip(ps) {
            while n.is_multiple_of(p) {
                n /= p;
                *e += power;
            }
            if n == 1 {
                break;
            }
        }
        debug_assert_eq!(n, 1);
    }
}

/// Product of p^e over nonnegative exponents.
fn expand(ps: &[u64], exps: impl Iterator<Item = i64>) -> BigUint {
    let mut acc = BigUint::one();
    let mut word: u64 = 1;
    for (&p, e) in ps.iter().zip(exps) {
        for _ in 0..e {
            match word.checked_mul(p) {
                Some(w) => word = w,
                None => {
                    acc *= word;
                    word = p;
                }
            }
        }
    }
    acc * word
}

fn bits(x: &BigUint) -> i64 {
    x.bits() as i64
}

/// sign * sqrt(num/den) rounded to f64.
fn signed_sqrt_ratio(sign: i32, num: &BigUint, den: &BigUint) -> f64 {
    if num.is_zero() || sign == 0 {
        return 0.0;
    }
    // choose an even shift so that num·2^shift / den carries ~120 bits
    let mut shift = 120 - (bits(num) - bits(den));
    if shift % 2 != 0 {
        shift += 1;
    }
    let q = if shift >= 0 {
        (num << shift as usize) / den
    } else {
        num / (den << (-shift) as usize)
    };
    let root = q.to_f64().expect("finite").sqrt();
    let v = root * 2f64.powi(-(shift / 2) as i32);
    if sign < 0 {
        -v
    } else {
        v
    }
}

/// Evaluates sign(S)·sqrt(prefactor·S²) where S = Σ_k ±1/D_k, with the D_k
/// given as exponent vectors. Pulling out the common denominator leaves integers.
fn racah_value(ps: &[u64], prefactor: Factored, terms: Vec<(i64, Factored)>) -> f64 {
    if terms.is_empty() {
        return 0.0;
    }
    let len = ps.len();
    let g: Vec<i64> = (0..len)
        .map(|i| terms.iter().map(|(_, t)| t.0[i]).max().unwrap())
        .collect();
    let mut sum = BigInt::zero();
    for (sgn, t) in &terms {
        let n = expand(ps, g.iter().zip(&t.0).map(|(a, b)| a - b));
        let n = BigInt::from_biguint(Sign::Plus, n);
        if *sgn > 0 {
            sum += n;
        } else {
            sum -= n;
        }
    }
    if sum.is_zero() {
        return 0.0;
    }
    let sign = if sum.is_negative() { -1 } else { 1 };
    let s2 = sum.abs().to_biguint().unwrap().pow(2u32);
    let total: Vec<i64> = (0..len).map(|i| prefactor.0[i] - 2 * g[i]).collect();
    let num = expand(ps, total.iter().map(|&e| e.max(0))) * s2;
    let den = expand(ps, total.iter().map(|&e| (-e).max(0)));
    signed_sqrt_ratio(sign, &num, &den)
}

fn triangle(a: i64, b: i64, c: i64) -> bool {
    // twice-values
    c <= a + b && c >= (a - b).abs() && (a + b + c) % 2 == 0
}

fn check_pair(j: i64, m: i64) -> bool {
    j >= 0 && m.abs() <= j && (j - m) % 2 == 0
}

/// Clebsch-Gordan coefficient <j1 m1; j2 m2 | J M>, arguments as twice-values.
pub fn clebsch_gordan_twice(tj1: i64, tm1: i64, tj2: i64, tm2: i64, tj: i64, tm: i64) -> f64 {
    if tm1 + tm2 != tm
        || !check_pair(tj1, tm1)
        || !check_pair(tj2, tm2)
        || !check_pair(tj, tm)
        || !triangle(tj1, tj2, tj)
    {
        return 0.0;
    }
    // integer quantities
    let a = (tj1 + tj2 - tj) / 2; // j1+j2-J
    let b = (tj1 - tm1) / 2; // j1-m1
    let c = (tj2 + tm2) / 2; // j2+m2
    let d = (tj - tj2 + tm1) / 2; // J-j2+m1
    let e = (tj - tj1 - tm2) / 2; // J-j1-m2
    let top = (tj1 + tj2 + tj) / 2 + 1;
    let ps = primes(top.max(2) as usize + 1);
    let mut pre = Factored::one(ps.len());
    pre.mul_int(&ps, (tj + 1) as u64, 1);
    for n in [(tj + tj1 - tj2) / 2, (tj - tj1 + tj2) / 2, a] {
        pre.mul_factorial(&ps, n, 1);
    }
    pre.mul_factorial(&ps, top, -1);
    for n in [
        (tj + tm) / 2,
        (tj - tm) / 2,
        b,
        (tj1 + tm1) / 2,
        (tj2 - tm2) / 2,
        c,
    ] {
        pre.mul_factorial(&ps, n, 1);
    }
    let kmin = 0.max(-d).max(-e);
    let kmax = a.min(b).min(c);
    let mut terms = Vec::new();
    for k in kmin..=kmax {
        let mut t = Factored::one(ps.len());
        for n in [k, a - k, b - k, c - k, d + k, e + k] {
            t.mul_factorial(&ps, n, 1);
        }
        terms.push((if k % 2 == 0 { 1 } else { -1 }, t));
    }
    racah_value(&ps, pre, terms)
}

/// <j1 m1; j2 m2 | J M>.
pub fn clebsch_gordan(
    j1: HalfInt,
    m1: HalfInt,
    j2: HalfInt,
    m2: HalfInt,
    j: HalfInt,
    m: HalfInt,
) -> Result<f64> {
    for (x, mx) in [(j1, m1), (j2, m2), (j, m)] {
        if x.0 < 0 || (x.0 - mx.0) % 2 != 0 {
            return Err(Error::InvalidArgument(format!(
                "malformed pair j={} m={}",
                x.value(),
                mx.value()
            )));
        }
        if mx.0.abs() > x.0 {
            return Err(Error::InvalidArgument(format!(
                "|m| > j for j={} m={}",
                x.value(),
                mx.value()
            )));
        }
    }
    Ok(clebsch_gordan_twice(j1.0, m1.0, j2.0, m2.0, j.0, m.0))
}

/// Wigner 3j symbol from the Clebsch-Gordan coefficient.
pub fn wigner_3j_twice(tj1: i64, tm1: i64, tj2: i64, tm2: i64, tj3: i64, tm3: i64) -> f64 {
    let cg = clebsch_gordan_twice(tj1, tm1, tj2, tm2, tj3, -tm3);
    if cg == 0.0 {
        return 0.0;
    }
    let phase = (tj1 - tj2 - tm3) / 2;
    let s = if phase.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    s * cg / ((tj3 + 1) as f64).sqrt()
}

/// Wigner 6j symbol {j1 j2 j3; j4 j5 j6}, arguments as twice-values.
pub fn wigner_6j_twice(t: [i64; 6]) -> f64 {
    let [a, b, c, d, e, f] = t;
    if t.iter().any(|&x| x < 0) {
        return 0.0;
    }
    let triads = [(a, b, c), (a, e, f), (d, b, f), (d, e, c)];
    if triads.iter().any(|&(x, y, z)| !triangle(x, y, z)) {
        return 0.0;
    }
    let sums: Vec<i64> = triads.iter().map(|&(x, y, z)| (x + y + z) / 2).collect();
    let bs = [
        (a + b + d + e) / 2,
        (b + c + e + f) / 2,
        (c + a + f + d) / 2,
    ];
    let top = bs.iter().max().unwrap() + 1;
    let ps = primes(top.max(2) as usize + 1);
    let mut pre = Factored::one(ps.len());
    for &(x, y, z) in &triads {
        pre.mul_factorial(&ps, (x + y - z) / 2, 1);
        pre.mul_factorial(&ps, (x - y + z) / 2, 1);
        pre.mul_factorial(&ps, (-x + y + z) / 2, 1);
        pre.mul_factorial(&ps, (x + y + z) / 2 + 1, -1);
    }
    let kmin = *sums.iter().max().unwrap();
    let kmax = *bs.iter().min().unwrap();
    let mut terms = Vec::new();
    for k in kmin..=kmax {
        // (k+1)! / Π(k - a_i)! Π(b_i - k)!  as a denominator: invert the numerator
        let mut den = Factored::one(ps.len());
        den.mul_factorial(&ps, k + 1, -1);
        for &s in &sums {
            den.mul_factorial(&ps, k - s, 1);
        }
        for &bb in &bs {
            den.mul_factorial(&ps, bb - k, 1);
        }
        terms.push((if k % 2 == 0 { 1 } else { -1 }, den));
    }
    racah_value(&ps, pre, terms)
}

pub fn wigner_6j(j: [HalfInt; 6]) -> Result<f64> {
    if j.iter().any(|x| x.0 < 0) {
        return Err(Error::InvalidArgument("negative angular momentum".into()));
    }
    Ok(wigner_6j_twice(j.map(|x| x.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    /// Naive f64 Racah formula, fine for small arguments.
    fn fact(n: i64) -> f64 {
        (1..=n).map(|k| k as f64).product()
    }

    fn cg_oracle(j1: i64, m1: i64, j2: i64, m2: i64, j: i64, m: i64) -> f64 {
        if m1 + m2 != m || j > j1 + j2 || j < (j1 - j2).abs() || (j1 + j2 + j) % 2 != 0 {
            return 0.0;
        }
        let h = |x: i64| x / 2;
        let pre =
            ((j + 1) as f64 * fact(h(j + j1 - j2)) * fact(h(j - j1 + j2)) * fact(h(j1 + j2 - j))
                / fact(h(j1 + j2 + j) + 1))
            .sqrt()
                * (fact(h(j + m))
                    * fact(h(j - m))
                    * fact(h(j1 - m1))
                    * fact(h(j1 + m1))
                    * fact(h(j2 - m2))
                    * fact(h(j2 + m2)))
                .sqrt();
        let mut s = 0.0;
        for k in 0..=h(j1 + j2 + j) {
            let args = [
                k,
                h(j1 + j2 - j) - k,
                h(j1 - m1) - k,
                h(j2 + m2) - k,
                h(j - j2 + m1) + k,
                h(j - j1 - m2) + k,
            ];
            if args.iter().any(|&x| x < 0) {
                continue;
            }
            let den: f64 = args.iter().map(|&x| fact(x)).product();
            s += if k % 2 == 0 { 1.0 } else { -1.0 } / den;
        }
        pre * s
    }

    #[test]
    fn known_values() {
        assert_abs_diff_eq!(
            clebsch_gordan_twice(1, 1, 1, -1, 0, 0),
            std::f64::consts::FRAC_1_SQRT_2,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            clebsch_gordan_twice(1, -1, 1, 1, 0, 0),
            -std::f64::consts::FRAC_1_SQRT_2,
            epsilon = 1e-15
        );
        // <1 0; 1 0 | 2 0> = sqrt(2/3)
        assert_abs_diff_eq!(
            clebsch_gordan_twice(2, 0, 2, 0, 4, 0),
            (2.0f64 / 3.0).sqrt(),
            epsilon = 1e-15
        );
        for tj1 in 0..8 {
            for tj2 in 0..8 {
                assert_abs_diff_eq!(
                    clebsch_gordan_twice(tj1, tj1, tj2, tj2, tj1 + tj2, tj1 + tj2),
                    1.0,
                    epsilon = 1e-15
                );
            }
        }
    }

    #[test]
    fn matches_float_oracle() {
        for tj1 in 0..=8 {
            for tj2 in 0..=8 {
                for tj in (tj1 - tj2).abs()..=tj1 + tj2 {
                    for tm1 in (-tj1..=tj1).step_by(2) {
                        for tm2 in (-tj2..=tj2).step_by(2) {
                            let got = clebsch_gordan_twice(tj1, tm1, tj2, tm2, tj, tm1 + tm2);
                            let want = cg_oracle(tj1, tm1, tj2, tm2, tj, tm1 + tm2);
                            assert_abs_diff_eq!(got, want, epsilon = 1e-13);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn orthogonality_up_to_j12() {
        for tj1 in 1..=12i64 {
            for tj2 in [1i64, 2, 3, 4, tj1] {
                let mut worst: f64 = 0.0;
                for tj in ((tj1 - tj2).abs()..=tj1 + tj2).step_by(2) {
                    for tm in (-tj..=tj).step_by(2) {
                        // first direction: sum over m1, m2
                        let mut s = 0.0;
                        for tm1 in (-tj1..=tj1).step_by(2) {
                            let c = clebsch_gordan_twice(tj1, tm1, tj2, tm - tm1, tj, tm);
                            s += c * c;
                        }
                        worst = worst.max((s - 1.0).abs());
                    }
                }
                // second direction: sum over J, M
                for tm1 in (-tj1..=tj1).step_by(2) {
                    for tm2 in (-tj2..=tj2).step_by(2) {
                        let mut s = 0.0;
                        for tj in ((tj1 - tj2).abs()..=tj1 + tj2).step_by(2) {
                            let c = clebsch_gordan_twice(tj1, tm1, tj2, tm2, tj, tm1 + tm2);
                            s += c * c;
                        }
                        worst = worst.max((s - 1.0).abs());
                    }
                }
                assert!(worst < 1e-13, "j1={tj1}/2 j2={tj2}/2 residual {worst}");
            }
        }
    }

    #[test]
    fn large_arguments_stay_normalized() {
        // j = 200 coupled with L = 2, the power-law sweep's regime
        let (tj, tl) = (400i64, 4i64);
        for tm in [400i64, 398, 0, -200] {
            let mut s = 0.0;
            for tml in (-tl..=tl).step_by(2) {
                let c = clebsch_gordan_twice(tj, tm - tml, tl, tml, tj, tm);
                s += c * c;
            }
            assert_abs_diff_eq!(s, 1.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn rejects_malformed() {
        let h = HalfInt::from_twice;
        assert!(clebsch_gordan(h(1), h(2), h(1), h(1), h(2), h(3)).is_err());
        assert!(HalfInt::new(0.3).is_err());
        assert_eq!(
            clebsch_gordan(h(2), h(2), h(2), h(0), h(2), h(0)).unwrap(),
            0.0
        );
    }

    fn sixj_from_cg(t: [i64; 6]) -> f64 {
        // {j1 j2 j12; j3 J j23} from recoupling: sum over projections of four CGs
        let [j1, j2, j12, j3, jj, j23] = t;
        let mm = jj; // any M works, choose M = J
        let mut s = 0.0;
        for m1 in (-j1..=j1).step_by(2) {
            for m2 in (-j2..=j2).step_by(2) {
                let m3 = mm - m1 - m2;
                if m3.abs() > j3 {
                    continue;
                }
                let a = clebsch_gordan_twice(j1, m1, j2, m2, j12, m1 + m2)
                    * clebsch_gordan_twice(j12, m1 + m2, j3, m3, jj, mm);
                let b = clebsch_gordan_twice(j2, m2, j3, m3, j23, m2 + m3)
                    * clebsch_gordan_twice(j1, m1, j23, m2 + m3, jj, mm);
                s += a * b;
            }
        }
        let phase = (j1 + j2 + j3 + jj) / 2;
        let sg = if phase % 2 == 0 { 1.0 } else { -1.0 };
        sg * s / (((j12 + 1) * (j23 + 1)) as f64).sqrt()
    }

    #[test]
    fn sixj_matches_recoupling_oracle() {
        for j1 in 0..=4 {
            for j2 in 0..=4 {
                for j3 in 0..=4 {
                    for j12 in ((j1 - j2).abs()..=j1 + j2).step_by(2) {
                        for j23 in ((j2 - j3).abs()..=j2 + j3).step_by(2) {
                            let lo = (j12 - j3).abs().max((j1 - j23).abs());
                            let hi = (j12 + j3).min(j1 + j23);
                            let mut jj = lo;
                            while jj <= hi {
                                if (j12 + j3 + jj) % 2 == 0 && (j1 + j23 + jj) % 2 == 0 {
                                    let t = [j1, j2, j12, j3, jj, j23];
                                    assert_abs_diff_eq!(
                                        wigner_6j_twice(t),
                                        sixj_from_cg(t),
                                        epsilon = 1e-12
                                    );
                                }
                                jj += 1;
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn sixj_special_values() {
        // {1 1 1; 1 1 1} = 1/6
        assert_abs_diff_eq!(
            wigner_6j_twice([2, 2, 2, 2, 2, 2]),
            1.0 / 6.0,
            epsilon = 1e-15
        );
        for a in 0..6 {
            for b in 0..6 {
                for c in ((a - b).abs()..=a + b).step_by(2) {
                    let phase = (a + b + c) / 2;
                    let want = if phase % 2 == 0 { 1.0 } else { -1.0 }
                        / (((b + 1) * (c + 1)) as f64).sqrt();
                    assert_abs_diff_eq!(wigner_6j_twice([a, b, c, 0, c, b]), want, epsilon = 1e-14);
                }
            }
        }
        assert_eq!(wigner_6j_twice([2, 2, 10, 2, 2, 2]), 0.0);
    }

    proptest! {
        #[test]
        fn sixj_classical_symmetries(t in proptest::array::uniform6(0i64..9)) {
            let [a, b, c, d, e, f] = t;
            let base = wigner_6j_twice(t);
            let perms = [
                [b, a, c, e, d, f], [a, c, b, d, f, e], [c, b, a, f, e, d],
                [b, c, a, e, f, d], [c, a, b, f, d, e],
                [d, e, c, a, b, f], [a, e, f, d, b, c], [d, b, f, a, e, c],
            ];
            for p in perms {
                prop_assert_eq!(wigner_6j_twice(p).to_bits(), base.to_bits());
            }
        }

        #[test]
        fn three_j_symmetry(tj1 in 0i64..8, tj2 in 0i64..8, k1 in 0i64..8, k2 in 0i64..8, dj in 0i64..8) {
            let tm1 = tj1 - 2 * (k1 % (tj1 + 1));
            let tm2 = tj2 - 2 * (k2 % (tj2 + 1));
            let tj3 = (tj1 - tj2).abs() + 2 * (dj % ((tj1 + tj2 - (tj1 - tj2).abs()) / 2 + 1));
            let tm3 = -tm1 - tm2;
            prop_assume!(tm3.abs() <= tj3);
            let a = wigner_3j_twice(tj1, tm1, tj2, tm2, tj3, tm3);
            let b = wigner_3j_twice(tj2, tm2, tj3, tm3, tj1, tm1);
            prop_assert!((a - b).abs() < 1e-14);
        }
    }
}
