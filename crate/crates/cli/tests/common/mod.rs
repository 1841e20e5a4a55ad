//! Reference computations that share no code with the library.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Gauss-Kronrod 7-15 on one panel: (kronrod, |kronrod - gauss|).
fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let s = f(c - h * XGK[i]) + f(c + h * XGK[i]);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

fn adapt(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let (k, err) = gk15(f, a, b);
    if err <= tol || depth > 50 {
        return k;
    }
    let m = 0.5 * (a + b);
    adapt(f, a, m, 0.5 * tol, depth + 1) + adapt(f, m, b, 0.5 * tol, depth + 1)
}

/// Recursive adaptive integral of `f` over `[a, b]`, started on `pieces` panels.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, pieces: usize) -> f64 {
    let h = (b - a) / pieces as f64;
    (0..pieces)
        .map(|i| adapt(f, a + i as f64 * h, a + (i + 1) as f64 * h, 1e-15, 0))
        .sum()
}

pub fn gauss_density(t: f64) -> f64 {
    (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// One-dimensional measure used by the oracle.
#[derive(Clone, Copy, Debug)]
pub enum Measure {
    Lebesgue(f64, f64),
    Gaussian,
}

impl Measure {
    pub fn integrate(&self, f: &dyn Fn(f64) -> f64) -> f64 {
        match *self {
            Measure::Lebesgue(a, b) => integrate(f, a, b, 8),
            // exp(-72) is far below the target accuracy
            Measure::Gaussian => integrate(&|t| f(t) * gauss_density(t), -12.0, 12.0, 48),
        }
    }

    pub fn double(&self, k: &dyn Fn(f64, f64) -> f64) -> f64 {
        self.integrate(&|x| self.integrate(&|y| k(x, y)))
    }
}

pub fn gaussian_kernel(l: f64) -> impl Fn(f64, f64) -> f64 {
    move |x, y| (-(x - y) * (x - y) / (2.0 * l * l)).exp()
}

/// `n x n` Hilbert matrix.
pub fn hilbert_rational(n: usize) -> Vec<Vec<BigRational>> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| BigRational::new(BigInt::one(), BigInt::from(i + j + 1)))
                .collect()
        })
        .collect()
}

/// Exact Gaussian elimination over the rationals.
pub fn solve_rational(mut a: Vec<Vec<BigRational>>, mut b: Vec<BigRational>) -> Vec<BigRational> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero()).expect("singular");
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let factor = &a[r][col] / &a[col][col];
            for c in col..n {
                let t = &factor * &a[col][c];
                a[r][c] -= t;
            }
            let t = &factor * &b[col];
            b[r] -= t;
        }
    }
    let mut x = vec![BigRational::zero(); n];
    for i in (0..n).rev() {
        let mut s = b[i].clone();
        for j in i + 1..n {
            s -= &a[i][j] * &x[j];
        }
        x[i] = s / &a[i][i];
    }
    x
}

/// Integer value of an exact rational, if it is one.
pub fn as_integer(q: &BigRational) -> Option<i64> {
    if q.is_integer() {
        let v = q.to_integer();
        if v.abs() < BigInt::from(i64::MAX) {
            return v.to_string().parse().ok();
        }
    }
    None
}

#[test]
fn oracle_self_check() {
    let v = integrate(&|x| x.powi(6), -1.0, 1.0, 1);
    assert!((v - 2.0 / 7.0).abs() < 1e-15);
    let v = Measure::Gaussian.integrate(&|x| x.powi(4));
    assert!((v - 3.0).abs() < 1e-12);
    let x = solve_rational(hilbert_rational(3), vec![BigRational::one(); 3]);
    assert_eq!(x.iter().map(|q| as_integer(q).unwrap()).collect::<Vec<_>>(), vec![3, -24, 30]);
}
