//! Exact integer and rational helpers shared by every module.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Rat = BigRational;
pub type IMat = Vec<Vec<i64>>;

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_vec(v: &[i64]) -> Vec<Rat> {
    v.iter().map(|&x| rat(x)).collect()
}

/// Parses `"3"`, `"-2/7"`.
pub fn parse_rat(s: &str) -> Option<Rat> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(Rat::new(n, d))
        }
        None => s.parse::<BigInt>().ok().map(Rat::from_integer),
    }
}

pub fn fmt_rat(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn gcd_all(v: &[i64]) -> i64 {
    v.iter().fold(0i64, |g, &x| g.gcd(&x))
}

pub fn is_primitive(v: &[i64]) -> bool {
    gcd_all(v) == 1
}

/// Primitive vector on the same ray, and the divisor. Zero maps to (zero, 0).
pub fn primitive(v: &[i64]) -> (Vec<i64>, i64) {
    let g = gcd_all(v);
    if g == 0 {
        return (v.to_vec(), 0);
    }
    (v.iter().map(|x| x / g).collect(), g)
}

pub fn dot(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn dot_rat(a: &[i64], b: &[Rat]) -> Rat {
    let mut s = Rat::zero();
    for (x, y) in a.iter().zip(b) {
        s += y * BigInt::from(*x);
    }
    s
}

pub fn add(a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub(a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn neg(a: &[i64]) -> Vec<i64> {
    a.iter().map(|x| -x).collect()
}

pub fn scale(a: &[i64], s: i64) -> Vec<i64> {
    a.iter().map(|x| x * s).collect()
}

pub fn cross2(a: &[i64], b: &[i64]) -> i64 {
    a[0] * b[1] - a[1] * b[0]
}

pub fn cross2_rat(a: &[Rat], b: &[Rat]) -> Rat {
    &a[0] * &b[1] - &a[1] * &b[0]
}

pub fn linf(v: &[i64]) -> i64 {
    v.iter().map(|x| x.abs()).max().unwrap_or(0)
}

/// Rotation by a quarter turn: the primitive conormal of a rank-2 ray, positive on its
/// counter-clockwise side.
pub fn ccw_normal(r: &[i64]) -> Vec<i64> {
    vec![-r[1], r[0]]
}

pub fn identity(n: usize) -> IMat {
    (0..n)
        .map(|i| (0..n).map(|j| i64::from(i == j)).collect())
        .collect()
}

pub fn mat_vec(m: &IMat, v: &[i64]) -> Vec<i64> {
    m.iter().map(|row| dot(row, v)).collect()
}

pub fn mat_mul(a: &IMat, b: &IMat) -> IMat {
    let n = a.len();
    let k = b.len();
    let m = if k == 0 { 0 } else { b[0].len() };
    (0..n)
        .map(|i| (0..m).map(|j| (0..k).map(|l| a[i][l] * b[l][j]).sum()).collect())
        .collect()
}

pub fn transpose(a: &IMat) -> IMat {
    if a.is_empty() {
        return vec![];
    }
    (0..a[0].len())
        .map(|j| a.iter().map(|row| row[j]).collect())
        .collect()
}

fn to_rat_mat(a: &IMat) -> Vec<Vec<Rat>> {
    a.iter().map(|r| rat_vec(r)).collect()
}

/// Row-reduces in place, returns pivot columns.
fn rref(m: &mut [Vec<Rat>]) -> Vec<usize> {
    let rows = m.len();
    if rows == 0 {
        return vec![];
    }
    let cols = m[0].len();
    let mut pivots = vec![];
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..cols {
                    let t = &m[r][j] * &f;
                    m[i][j] -= t;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank_rat(m: &[Vec<Rat>]) -> usize {
    let mut m = m.to_vec();
    rref(&mut m).len()
}

pub fn rank(m: &IMat) -> usize {
    rank_rat(&to_rat_mat(m))
}

/// Solves `sum_j x_j * cols[j] = b`; `None` if inconsistent or not unique.
pub fn solve_columns(cols: &[Vec<Rat>], b: &[Rat]) -> Option<Vec<Rat>> {
    let n = cols.len();
    let d = b.len();
    let mut aug: Vec<Vec<Rat>> = (0..d)
        .map(|i| {
            let mut row: Vec<Rat> = cols.iter().map(|c| c[i].clone()).collect();
            row.push(b[i].clone());
            row
        })
        .collect();
    let piv = rref(&mut aug);
    if piv.contains(&n) || piv.len() < n {
        return None;
    }
    Some((0..n).map(|i| aug[i][n].clone()).collect())
}

/// Some solution of `a x = b` (free variables set to zero), or `None` if inconsistent.
pub fn solve_any(a: &[Vec<Rat>], b: &[Rat], ncols: usize) -> Option<Vec<Rat>> {
    let mut aug: Vec<Vec<Rat>> = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let piv = rref(&mut aug);
    if piv.contains(&ncols) {
        return None;
    }
    let mut x = vec![Rat::zero(); ncols];
    for (r, &c) in piv.iter().enumerate() {
        x[c] = aug[r][ncols].clone();
    }
    Some(x)
}

/// Basis of the rational kernel `{x : a x = 0}`.
pub fn kernel(a: &IMat, ncols: usize) -> Vec<Vec<Rat>> {
    let mut m = to_rat_mat(a);
    if m.is_empty() {
        return (0..ncols)
            .map(|i| (0..ncols).map(|j| rat(i64::from(i == j))).collect())
            .collect();
    }
    let piv = rref(&mut m);
    let free: Vec<usize> = (0..ncols).filter(|c| !piv.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut x = vec![Rat::zero(); ncols];
            x[f] = Rat::one();
            for (r, &p) in piv.iter().enumerate() {
                x[p] = -m[r][f].clone();
            }
            x
        })
        .collect()
}

/// Clears denominators and divides by the content.
pub fn primitive_from_rat(v: &[Rat]) -> Vec<i64> {
    let mut l = BigInt::one();
    for x in v {
        l = l.lcm(x.denom());
    }
    let ints: Vec<BigInt> = v.iter().map(|x| (x * &l).to_integer()).collect();
    let mut g = BigInt::zero();
    for x in &ints {
        g = g.gcd(x);
    }
    if g.is_zero() {
        return vec![0; v.len()];
    }
    ints.iter()
        .map(|x| i64::try_from(x / &g).expect("lattice vector exceeds i64"))
        .collect()
}

pub fn det(a: &IMat) -> i64 {
    let n = a.len();
    match n {
        0 => 1,
        1 => a[0][0],
        2 => a[0][0] * a[1][1] - a[0][1] * a[1][0],
        _ => {
            let mut m = to_rat_mat(a);
            let mut d = Rat::one();
            for c in 0..n {
                let Some(p) = (c..n).find(|&i| !m[i][c].is_zero()) else {
                    return 0;
                };
                if p != c {
                    m.swap(p, c);
                    d = -d;
                }
                d *= &m[c][c];
                for i in c + 1..n {
                    let f = &m[i][c] / &m[c][c];
                    for j in c..n {
                        let t = &m[c][j] * &f;
                        m[i][j] -= t;
                    }
                }
            }
            i64::try_from(d.to_integer()).expect("determinant exceeds i64")
        }
    }
}

/// Inverse of an integer matrix, if it is unimodular.
pub fn unimodular_inverse(a: &IMat) -> Option<IMat> {
    let n = a.len();
    if det(a).abs() != 1 {
        return None;
    }
    let cols: Vec<Vec<Rat>> = (0..n).map(|j| a.iter().map(|r| rat(r[j])).collect()).collect();
    let mut inv = vec![vec![0i64; n]; n];
    for j in 0..n {
        let e: Vec<Rat> = (0..n).map(|i| rat(i64::from(i == j))).collect();
        let x = solve_columns(&cols, &e)?;
        for i in 0..n {
            if !x[i].is_integer() {
                return None;
            }
            inv[i][j] = i64::try_from(x[i].to_integer()).ok()?;
        }
    }
    Some(inv)
}

/// Matrix whose columns are the given vectors.
pub fn from_columns(cols: &[Vec<i64>]) -> IMat {
    let d = cols.first().map_or(0, Vec::len);
    (0..d).map(|i| cols.iter().map(|c| c[i]).collect()).collect()
}

/// Exact half-plane angle key for sorting rank-2 vectors counter-clockwise from the
/// positive x-axis.
pub fn angle_cmp(a: &[Rat], b: &[Rat]) -> std::cmp::Ordering {
    let half = |v: &[Rat]| -> u8 {
        if v[1].is_positive() || (v[1].is_zero() && v[0].is_positive()) {
            0
        } else {
            1
        }
    };
    let (ha, hb) = (half(a), half(b));
    if ha != hb {
        return ha.cmp(&hb);
    }
    let c = cross2_rat(a, b);
    if c.is_positive() {
        std::cmp::Ordering::Less
    } else if c.is_negative() {
        std::cmp::Ordering::Greater
    } else {
        std::cmp::Ordering::Equal
    }
}

pub fn angle_cmp_int(a: &[i64], b: &[i64]) -> std::cmp::Ordering {
    angle_cmp(&rat_vec(a), &rat_vec(b))
}

/// Deterministic 64-bit mixer for deriving per-task seeds.
pub fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn mix_seed(seed: u64, parts: &[i64]) -> u64 {
    parts
        .iter()
        .fold(splitmix(seed), |h, &p| splitmix(h ^ (p as u64)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_of_ray_is_conormal() {
        let k = kernel(&vec![vec![1, 1]], 2);
        assert_eq!(k.len(), 1);
        let p = primitive_from_rat(&k[0]);
        assert_eq!(dot(&p, &[1, 1]), 0);
        assert!(is_primitive(&p));
    }

    #[test]
    fn inverse_round_trip() {
        let a = vec![vec![2, 1], vec![1, 1]];
        let b = unimodular_inverse(&a).unwrap();
        assert_eq!(mat_mul(&a, &b), identity(2));
        assert!(unimodular_inverse(&vec![vec![2, 0], vec![0, 1]]).is_none());
    }

    #[test]
    fn angles_sort_counter_clockwise() {
        let mut v = vec![vec![0, -1], vec![-1, 0], vec![1, 0], vec![0, 1], vec![1, 1]];
        v.sort_by(|a, b| angle_cmp_int(a, b));
        assert_eq!(v, vec![vec![1, 0], vec![1, 1], vec![0, 1], vec![-1, 0], vec![0, -1]]);
    }

    #[test]
    fn rationals_parse() {
        assert_eq!(parse_rat("-2/4"), Some(ratio(-1, 2)));
        assert_eq!(parse_rat("7"), Some(rat(7)));
        assert_eq!(parse_rat("1/0"), None);
        assert_eq!(det(&vec![vec![2, 0, 1], vec![1, 1, 0], vec![0, 3, 1]]), 5);
    }
}
