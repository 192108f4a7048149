//! Independent reference computations and the criterion checks built on
//! them. Shared by the oracle suites and the acceptance target.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use tactile_core::learners::{
    ClassWeights, FeatureSubset, ForestConfig, ForestModel, GpConfig, GpHyper, GpModel,
    LinearModel, SvmConfig, SvmModel, TreeNode,
};
use tactile_core::sim::{simulate_frame, Contact, SkinModel};
use tactile_core::{seed, ForceLevel, NodeCoord, StretchRatio, TERMINALS};

pub type Check = Result<String, String>;

/// Inverse by Gauss-Jordan elimination with partial pivoting.
pub fn gauss_jordan_inverse(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap();
        m.swap(col, piv);
        let p = m[col][col];
        assert!(p.abs() > 1e-300, "singular matrix in oracle");
        for v in m[col].iter_mut() {
            *v /= p;
        }
        let pivot_row = m[col].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != col {
                let f = row[col];
                if f != 0.0 {
                    for (v, pv) in row.iter_mut().zip(&pivot_row) {
                        *v -= f * pv;
                    }
                }
            }
        }
    }
    m.into_iter().map(|r| r[n..].to_vec()).collect()
}

fn mat_vec(a: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    a.iter()
        .map(|r| r.iter().zip(v).map(|(x, y)| x * y).sum())
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn rbf(a: &[f64], b: &[f64], h: &GpHyper) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    h.signal_var * (-d2 / (2.0 * h.length_scale * h.length_scale)).exp()
}

/// Posterior mean and latent variance through an explicit inverse of
/// `K + σn²I`, with the prior mean set to the target average.
pub fn gp_oracle(x: &[Vec<f64>], y: &[f64], h: &GpHyper, q: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let n = x.len();
    let k: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| rbf(&x[i], &x[j], h) + if i == j { h.noise_var } else { 0.0 })
                .collect()
        })
        .collect();
    let kinv = gauss_jordan_inverse(&k);
    let m = y.iter().sum::<f64>() / n as f64;
    let centred: Vec<f64> = y.iter().map(|v| v - m).collect();
    let alpha = mat_vec(&kinv, &centred);
    let mut means = Vec::new();
    let mut vars = Vec::new();
    for p in q {
        let ks: Vec<f64> = x.iter().map(|xi| rbf(xi, p, h)).collect();
        means.push(m + dot(&ks, &alpha));
        vars.push(h.signal_var - dot(&ks, &mat_vec(&kinv, &ks)));
    }
    (means, vars)
}

/// Weights and intercept from the normal equations of `[X 1]`.
pub fn ols_oracle(x: &[Vec<f64>], y: &[f64]) -> (Vec<f64>, f64) {
    let d = x[0].len();
    let a: Vec<Vec<f64>> = x
        .iter()
        .map(|r| {
            let mut r = r.clone();
            r.push(1.0);
            r
        })
        .collect();
    let ata: Vec<Vec<f64>> = (0..=d)
        .map(|i| {
            (0..=d)
                .map(|j| a.iter().map(|r| r[i] * r[j]).sum())
                .collect()
        })
        .collect();
    let aty: Vec<f64> = (0..=d)
        .map(|i| a.iter().zip(y).map(|(r, v)| r[i] * v).sum())
        .collect();
    let beta = mat_vec(&gauss_jordan_inverse(&ata), &aty);
    (beta[..d].to_vec(), beta[d])
}

/// Every candidate split by brute force: each feature, each midpoint
/// between consecutive distinct values, partition counted from scratch.
/// Returns (feature, threshold, weighted child impurity).
pub fn exhaustive_splits(x: &[Vec<f64>], y: &[usize], n_classes: usize) -> Vec<(usize, f64, f64)> {
    let n = x.len();
    let gini = |idx: &[usize]| {
        let mut c = vec![0.0; n_classes];
        for &i in idx {
            c[y[i]] += 1.0;
        }
        let t = idx.len() as f64;
        1.0 - c.iter().map(|v| (v / t) * (v / t)).sum::<f64>()
    };
    let mut out = Vec::new();
    for f in 0..x[0].len() {
        let mut vals: Vec<f64> = x.iter().map(|r| r[f]).collect();
        vals.sort_by(f64::total_cmp);
        vals.dedup();
        for w in vals.windows(2) {
            let t = (w[0] + w[1]) / 2.0;
            let (l, r): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| x[i][f] <= t);
            let imp = (l.len() as f64 * gini(&l) + r.len() as f64 * gini(&r)) / n as f64;
            out.push((f, t, imp));
        }
    }
    out
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo..hi)
}

pub fn check_gp(problems: usize, tol: f64) -> Check {
    let mut rng = seed::rng(3);
    let mut worst = 0.0f64;
    for p in 0..problems {
        let n = rng.random_range(1..=5);
        let d = rng.random_range(1..=3);
        let x: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..d).map(|_| uniform(&mut rng, -2.0, 2.0)).collect())
            .collect();
        let y: Vec<f64> = (0..n).map(|_| uniform(&mut rng, -3.0, 3.0)).collect();
        let hyper = GpHyper {
            length_scale: uniform(&mut rng, 0.5, 2.0),
            signal_var: uniform(&mut rng, 0.5, 2.0),
            noise_var: uniform(&mut rng, 1e-3, 1e-1),
        };
        let q: Vec<Vec<f64>> = (0..4)
            .map(|_| (0..d).map(|_| uniform(&mut rng, -2.5, 2.5)).collect())
            .collect();
        let cfg = GpConfig {
            hyper,
            ..GpConfig::default()
        };
        let model =
            GpModel::fit(&x, &y, &cfg, p as u64).map_err(|e| format!("problem {p}: {e}"))?;
        let pred = model.predict(&q).map_err(|e| e.to_string())?;
        let (mean, var) = gp_oracle(&x, &y, &hyper, &q);
        for i in 0..q.len() {
            worst = worst
                .max((pred.mean[i] - mean[i]).abs())
                .max((pred.std[i].powi(2) - var[i].max(0.0)).abs());
        }
    }
    if worst <= tol {
        Ok(format!("{problems} problems, max deviation {worst:.2e}"))
    } else {
        Err(format!("max deviation {worst:.2e} exceeds {tol:.0e}"))
    }
}

pub fn check_ols(problems: usize, tol: f64) -> Check {
    let mut rng = seed::rng(4);
    let mut worst = 0.0f64;
    for p in 0..problems {
        let d = rng.random_range(1..=5);
        let n = rng.random_range(3 * (d + 1)..=50);
        let x: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..d).map(|_| uniform(&mut rng, -1.0, 1.0)).collect())
            .collect();
        let w: Vec<f64> = (0..d).map(|_| uniform(&mut rng, -2.0, 2.0)).collect();
        let b = uniform(&mut rng, -1.0, 1.0);
        let y: Vec<f64> = x
            .iter()
            .map(|r| dot(r, &w) + b + uniform(&mut rng, -0.1, 0.1))
            .collect();
        let m = LinearModel::fit(&x, &y).map_err(|e| format!("problem {p}: {e}"))?;
        let (ow, ob) = ols_oracle(&x, &y);
        worst = worst.max((m.intercept - ob).abs());
        for (a, o) in m.weights.iter().zip(&ow) {
            worst = worst.max((a - o).abs());
        }
    }
    if worst <= tol {
        Ok(format!("{problems} problems, max deviation {worst:.2e}"))
    } else {
        Err(format!("max deviation {worst:.2e} exceeds {tol:.0e}"))
    }
}

#[derive(Debug, Deserialize)]
pub struct ForestFixture {
    pub name: String,
    pub n_classes: usize,
    pub x: Vec<Vec<f64>>,
    pub y: Vec<usize>,
}

#[derive(Debug, Deserialize)]
pub struct SvmFixture {
    pub name: String,
    pub x: Vec<Vec<f64>>,
    pub y: Vec<i8>,
    pub c: f64,
    pub gamma: f64,
}

pub fn forest_fixtures() -> Vec<ForestFixture> {
    serde_json::from_str(include_str!("../fixtures/forest_splits.json")).unwrap()
}

pub fn svm_fixtures() -> Vec<SvmFixture> {
    serde_json::from_str(include_str!("../fixtures/svm_separable.json")).unwrap()
}

/// Root split of a single unbagged all-feature tree against brute force.
/// Among splits tied on impurity (within 1e-12) the earliest feature and
/// then the lowest threshold is expected.
pub fn check_forest_fixture(fx: &ForestFixture) -> Check {
    let cfg = ForestConfig {
        n_trees: 1,
        features_per_split: FeatureSubset::All,
        bootstrap: false,
        ..ForestConfig::default()
    };
    let model = ForestModel::fit(&fx.x, &fx.y, fx.n_classes, &cfg).map_err(|e| e.to_string())?;
    let (feature, threshold) = match model.trees[0].root() {
        TreeNode::Split {
            feature, threshold, ..
        } => (*feature, *threshold),
        TreeNode::Leaf { .. } => return Err(format!("{}: tree has no root split", fx.name)),
    };
    let all = exhaustive_splits(&fx.x, &fx.y, fx.n_classes);
    let best = all.iter().map(|s| s.2).fold(f64::INFINITY, f64::min);
    let expected = all
        .iter()
        .filter(|s| s.2 <= best + 1e-12)
        .min_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)))
        .unwrap();
    if feature == expected.0 && (threshold - expected.1).abs() <= 1e-12 * expected.1.abs().max(1.0)
    {
        Ok(format!("{}: feature {feature} at {threshold}", fx.name))
    } else {
        Err(format!(
            "{}: got feature {feature} at {threshold}, brute force gives feature {} at {}",
            fx.name, expected.0, expected.1
        ))
    }
}

pub fn check_svm_fixture(fx: &SvmFixture) -> Check {
    let cfg = SvmConfig {
        c: fx.c,
        gamma: Some(fx.gamma),
        class_weights: ClassWeights::Balanced,
        ..SvmConfig::default()
    };
    let m = SvmModel::fit(&fx.x, &fx.y, &cfg).map_err(|e| e.to_string())?;
    // dual_coefs hold αᵢyᵢ, so their sum is Σαᵢyᵢ
    let balance: f64 = m.dual_coefs.iter().sum();
    if balance.abs() > 1e-6 {
        return Err(format!("{}: Σαy = {balance:.3e}", fx.name));
    }
    for &a in &m.dual_coefs {
        let bound = m.bound_for(a);
        if a.abs() > bound + 1e-9 {
            return Err(format!(
                "{}: |α| = {} above its bound {bound}",
                fx.name,
                a.abs()
            ));
        }
    }
    let pred = m.predict(&fx.x).map_err(|e| e.to_string())?;
    let wrong = pred.iter().zip(&fx.y).filter(|(p, y)| p != y).count();
    if wrong > 0 {
        return Err(format!(
            "{}: {wrong} training points misclassified",
            fx.name
        ));
    }
    Ok(format!(
        "{}: {} support vectors, Σαy = {balance:.1e}",
        fx.name,
        m.dual_coefs.len()
    ))
}

/// A random noiseless skin model.
pub fn random_model(rng: &mut ChaCha8Rng) -> SkinModel {
    SkinModel {
        baseline: uniform(rng, 0.5, 3.0),
        stretch_gain_x: uniform(rng, 0.05, 1.0),
        stretch_gain_y: uniform(rng, 0.05, 1.0),
        force_scale: uniform(rng, 0.05, 1.0),
        force_sat: uniform(rng, 0.5, 5.0),
        neighbor_decay: uniform(rng, 0.05, 0.95),
        neighbor_reach: rng.random_range(0..=4),
        noise_sigma: 0.0,
    }
}

pub fn random_node(rng: &mut ChaCha8Rng) -> NodeCoord {
    NodeCoord::new(rng.random_range(1..=10), rng.random_range(1..=10)).unwrap()
}

fn contact(node: NodeCoord, f: f64) -> Contact {
    Contact::new(node, ForceLevel::new(f).unwrap()).unwrap()
}

fn frame(m: &SkinModel, lambda: f64, cs: &[Contact], s: u64) -> [f64; 20] {
    simulate_frame(m, StretchRatio::new(lambda).unwrap(), cs, s)
        .unwrap()
        .features()
}

/// The five simulator properties, each over `cases` random parameterisations.
pub fn sim_properties(cases: usize) -> Vec<(&'static str, Check)> {
    let mut rng = seed::rng(7);
    let mut fails: [Vec<String>; 5] = Default::default();
    const TOL: f64 = 1e-12;
    for case in 0..cases {
        let m = random_model(&mut rng);
        let lam = [
            1.0,
            uniform(&mut rng, 1.0, 1.5),
            uniform(&mut rng, 1.5, 2.0),
        ];
        let a = random_node(&mut rng);
        let mut b = random_node(&mut rng);
        while b == a {
            b = random_node(&mut rng);
        }
        let (fa, fb) = (uniform(&mut rng, 0.1, 8.0), uniform(&mut rng, 0.1, 8.0));
        let s = rng.random::<u64>();

        // determinism: repeat calls agree, noisy or not
        let noisy = SkinModel {
            noise_sigma: 0.01,
            ..m.clone()
        };
        let same = frame(&noisy, lam[1], &[contact(a, fa)], s)
            == frame(&noisy, lam[1], &[contact(a, fa)], s)
            && frame(&m, lam[1], &[contact(a, fa)], s)
                == frame(&m, lam[1], &[contact(a, fa)], s ^ 1);
        if !same {
            fails[0].push(format!("case {case}"));
        }

        // stretch linearity: three stretch levels lie on one line per terminal
        let c: Vec<[f64; 20]> = lam
            .iter()
            .map(|&l| frame(&m, l, &[contact(a, fa)], s))
            .collect();
        for (i, ((c0, c1), c2)) in c[0].iter().zip(&c[1]).zip(&c[2]).enumerate() {
            let slope = (c1 - c0) / (lam[1] - lam[0]);
            if (c0 + slope * (lam[2] - lam[0]) - c2).abs() > 1e-9 {
                fails[1].push(format!("case {case} channel {i}"));
                break;
            }
        }

        // force monotonicity: more force never lowers a channel, raises the ones under the node
        let (lo, hi) = (fa.min(fb), fa.max(fb) + 0.5);
        let cl = frame(&m, lam[1], &[contact(a, lo)], s);
        let ch = frame(&m, lam[1], &[contact(a, hi)], s);
        let under = [a.x() as usize - 1, TERMINALS + a.y() as usize - 1];
        if (0..20).any(|i| ch[i] < cl[i]) || under.iter().any(|&i| ch[i] <= cl[i]) {
            fails[2].push(format!("case {case}"));
        }

        // locality: channels beyond the reach read as if untouched
        let rest = frame(&m, lam[1], &[], s);
        let pressed = frame(&m, lam[1], &[contact(a, fa)], s);
        for t in 1..=TERMINALS as u32 {
            let i = t as usize - 1;
            for (coord, offset) in [(a.x() as u32, 0), (a.y() as u32, TERMINALS)] {
                let far = t.abs_diff(coord) > m.neighbor_reach;
                let moved = (pressed[offset + i] - rest[offset + i]).abs() > TOL;
                if far == moved {
                    fails[3].push(format!("case {case} terminal {t}"));
                }
            }
        }

        // superposition: two contacts add their single-contact increments
        let only_b = frame(&m, lam[1], &[contact(b, fb)], s);
        let both = frame(&m, lam[1], &[contact(a, fa), contact(b, fb)], s);
        if (0..20).any(|i| {
            ((both[i] - rest[i]) - (pressed[i] - rest[i]) - (only_b[i] - rest[i])).abs() > 1e-12
        }) {
            fails[4].push(format!("case {case}"));
        }
    }
    let names = [
        "determinism",
        "stretch linearity",
        "force monotonicity",
        "locality",
        "superposition",
    ];
    names
        .into_iter()
        .zip(fails)
        .map(|(n, f)| {
            let r = if f.is_empty() {
                Ok(format!("{cases} parameterisations"))
            } else {
                Err(format!("{} of {cases} failed, first: {}", f.len(), f[0]))
            };
            (n, r)
        })
        .collect()
}
