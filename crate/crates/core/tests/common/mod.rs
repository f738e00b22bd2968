#![allow(dead_code)]

use sliced_saa::lp::{DenseLP, Sense};
use sliced_saa::SeedSpec;

/// Brute-force optimum over all vertices of `{x : G x <= g}`.
pub fn vertex_oracle(c: &[f64], g: &[Vec<f64>], h: &[f64]) -> Option<f64> {
    let n = c.len();
    let rows = g.len();
    let mut best: Option<f64> = None;
    let mut idx: Vec<usize> = (0..n).collect();
    loop {
        if let Some(x) = solve_square(&idx.iter().map(|&i| g[i].clone()).collect::<Vec<_>>(), &idx.iter().map(|&i| h[i]).collect::<Vec<_>>()) {
            let feasible = g
                .iter()
                .zip(h)
                .all(|(row, &b)| row.iter().zip(&x).map(|(a, v)| a * v).sum::<f64>() <= b + 1e-9);
            if feasible {
                let v: f64 = c.iter().zip(&x).map(|(a, b)| a * b).sum();
                best = Some(best.map_or(v, |b: f64| b.min(v)));
            }
        }
        // next combination
        let mut k = n;
        loop {
            if k == 0 {
                return best;
            }
            k -= 1;
            if idx[k] < rows - n + k {
                idx[k] += 1;
                for j in k + 1..n {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

fn solve_square(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.iter().zip(b).map(|(r, &v)| {
        let mut r = r.clone();
        r.push(v);
        r
    }).collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col].abs() < 1e-10 {
            return None;
        }
        m.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = m[r][col] / m[col][col];
                for k in col..=n {
                    m[r][k] -= f * m[col][k];
                }
            }
        }
    }
    Some((0..n).map(|i| m[i][n] / m[i][i]).collect())
}

/// A random bounded LP and the same feasible set as `G x <= h`.
pub struct Case {
    pub lp: DenseLP,
    pub g: Vec<Vec<f64>>,
    pub h: Vec<f64>,
}

pub fn random_case(seed: u64) -> Case {
    let mut s = SeedSpec::new(seed).stream();
    let mut u = |lo: f64, hi: f64| lo + (hi - lo) * s.uniform_unit();
    let n = 2 + (u(0.0, 5.0) as usize);
    let rows = 1 + (u(0.0, 6.0) as usize);
    let c: Vec<f64> = (0..n).map(|_| (u(-5.0, 5.0) * 4.0).round() / 4.0).collect();
    let mut lp = DenseLP::new(c);
    let mut g = Vec::new();
    let mut h = Vec::new();
    for j in 0..n {
        let (lo, hi) = match u(0.0, 3.0) as usize {
            0 => (0.0, 10.0),
            1 => (-3.0, 7.0),
            _ => (u(-10.0, 0.0).round(), u(1.0, 10.0).round()),
        };
        lp.set_bounds(j, lo, hi).unwrap();
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        g.push(e.clone());
        h.push(hi);
        e[j] = -1.0;
        g.push(e);
        h.push(-lo);
    }
    for _ in 0..rows {
        let a: Vec<f64> = (0..n).map(|_| (u(-4.0, 4.0) * 2.0).round() / 2.0).collect();
        let b = u(-6.0, 12.0).round();
        let sense = match u(0.0, 5.0) as usize {
            0 => Sense::Eq,
            1 | 2 => Sense::Ge,
            _ => Sense::Le,
        };
        lp.add_constraint(a.clone(), sense, b).unwrap();
        let neg: Vec<f64> = a.iter().map(|v| -v).collect();
        match sense {
            Sense::Le => {
                g.push(a);
                h.push(b);
            }
            Sense::Ge => {
                g.push(neg);
                h.push(-b);
            }
            Sense::Eq => {
                g.push(a);
                h.push(b);
                g.push(neg);
                h.push(-b);
            }
        }
    }
    Case { lp, g, h }
}

