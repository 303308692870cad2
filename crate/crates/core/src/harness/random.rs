//! Random instances: lightlike affine hyperplanes with random metallic
//! structures, and randomized curved screen semi-invariant charts.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::manifest::{
    AmbientSpec, HypersurfaceSpec, Manifest, MetallicSpec, Num, ScreenModeSpec, Selection,
    StructureSpec,
};
use crate::error::{MlhError, Result};
use crate::scalar::{rat, QuadNum, Rational};

/// Bound on random numerators and denominators.
pub const BOUND: i64 = 16;

fn random_rational(rng: &mut ChaCha8Rng, nonzero: bool) -> Rational {
    loop {
        let n = rng.gen_range(-BOUND..=BOUND);
        if n != 0 || !nonzero {
            return rat(n, rng.gen_range(1..=BOUND));
        }
    }
}

fn num(r: Rational) -> Num {
    Num::exact(&QuadNum::rational(r))
}

/// Rational covector with `Σ εᵢ cᵢ² = 0`: random entries except at one
/// negative and one positive slot, which are completed by factoring
/// `c_j² − c_i² = −S` as `(c_j − c_i)(c_j + c_i)`.
pub fn null_covector(signature: &[i8], rng: &mut ChaCha8Rng) -> Result<Vec<Rational>> {
    let neg: Vec<usize> = (0..signature.len()).filter(|&k| signature[k] < 0).collect();
    let pos: Vec<usize> = (0..signature.len()).filter(|&k| signature[k] > 0).collect();
    if neg.is_empty() || pos.is_empty() {
        return Err(MlhError::Domain(
            "a definite signature has no null directions".into(),
        ));
    }
    let i = *neg.choose(rng).expect("non-empty");
    let j = *pos.choose(rng).expect("non-empty");
    let mut c: Vec<Rational> = (0..signature.len())
        .map(|_| random_rational(rng, false))
        .collect();
    let s: Rational = (0..signature.len())
        .filter(|&k| k != i && k != j)
        .map(|k| &c[k] * &c[k] * rat(signature[k] as i64, 1))
        .sum();
    let t = random_rational(rng, true);
    let w = -s / &t;
    c[j] = (&t + &w) / rat(2, 1);
    c[i] = (&w - &t) / rat(2, 1);
    Ok(c)
}

/// Diagonal structure over `{σ, p−σ}` or one built from a random involutive
/// product structure `F` (signed swaps between equal-sign coordinates).
fn random_structure(signature: &[i8], rng: &mut ChaCha8Rng) -> StructureSpec {
    let n = signature.len();
    if rng.gen_bool(0.5) {
        let entries = (0..n)
            .map(|_| Num::Expr(if rng.gen_bool(0.5) { "sigma" } else { "p-sigma" }.into()))
            .collect();
        return StructureSpec::Diagonal { entries };
    }
    let mut f = vec![vec![0i64; n]; n];
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut used = vec![false; n];
    for &a in &order {
        if used[a] {
            continue;
        }
        used[a] = true;
        let partner = order
            .iter()
            .copied()
            .find(|&b| !used[b] && signature[b] == signature[a]);
        match partner {
            Some(b) if rng.gen_bool(0.5) => {
                used[b] = true;
                let s = if rng.gen_bool(0.5) { 1 } else { -1 };
                f[a][b] = s;
                f[b][a] = s;
            }
            _ => f[a][a] = if rng.gen_bool(0.5) { 1 } else { -1 },
        }
    }
    StructureSpec::FromProduct {
        f: f.into_iter()
            .map(|r| r.into_iter().map(Num::Int).collect())
            .collect(),
        branch: if rng.gen_bool(0.5) { "+" } else { "-" }.into(),
    }
}

/// Random lightlike hyperplane manifest, reproducible by seed.
pub fn generate_random_instance(
    p: i64,
    q: i64,
    dim: usize,
    signature: &[i8],
    seed: u64,
) -> Result<Manifest> {
    if signature.len() != dim {
        return Err(MlhError::Domain(format!(
            "signature has {} entries, dim is {dim}",
            signature.len()
        )));
    }
    if dim < 2 {
        return Err(MlhError::Domain("dimension must be at least 2".into()));
    }
    if p < 1 || q < 1 {
        return Err(MlhError::Domain("p and q must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = null_covector(signature, &mut rng)?;
    let offset = random_rational(&mut rng, false);
    let j = random_structure(signature, &mut rng);
    Ok(Manifest {
        name: Some(format!("random-p{p}-q{q}-d{dim}-s{seed}")),
        description: None,
        ambient: AmbientSpec {
            dim,
            signature: signature.to_vec(),
        },
        metallic: MetallicSpec { p, q, j },
        hypersurface: Some(HypersurfaceSpec::Affine {
            c: c.into_iter().map(num).collect(),
            offset: num(offset),
        }),
        screen_override: None,
        screen_mode: None,
        points: None,
        identities: Some(Selection::Keyword("all".into())),
        samples: 2,
        seed,
        tolerance: None,
        backend: None,
        differentiation: None,
        claims: Vec::new(),
        expect: None,
    })
}

/// Curved screen semi-invariant families.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    /// `x₁ + x₂ = F(x₃ + x₄, x₅ + x₆)` in ℝ⁷₃ with a quadratic `F`;
    /// `μ₀` and `D̊` are integrable.
    Graph,
    /// Light cone of ℝ³₁ times ℝ⁴, with `J̃` from a product structure that
    /// swaps the cone factor with a copy; `μ₀` and `D̊` are not integrable.
    ConeCopy,
}

fn coefficient(rng: &mut ChaCha8Rng) -> String {
    let k = rng.gen_range(-10..=10);
    format!("{}", k as f64 / 20.0)
}

fn pq(rng: &mut ChaCha8Rng) -> (i64, i64) {
    (rng.gen_range(1..=4), rng.gen_range(1..=4))
}

fn chart_manifest(
    name: String,
    signature: Vec<i8>,
    (p, q): (i64, i64),
    j: StructureSpec,
    components: Vec<String>,
    domain: Vec<[f64; 2]>,
    seed: u64,
) -> Manifest {
    Manifest {
        name: Some(name),
        description: None,
        ambient: AmbientSpec {
            dim: signature.len(),
            signature,
        },
        metallic: MetallicSpec { p, q, j },
        hypersurface: Some(HypersurfaceSpec::Chart { components, domain }),
        screen_override: None,
        screen_mode: Some(ScreenModeSpec::MetallicAdapted),
        points: None,
        identities: Some(Selection::Keyword("all".into())),
        samples: 8,
        seed,
        tolerance: None,
        backend: None,
        differentiation: None,
        claims: Vec::new(),
        expect: None,
    }
}

/// Graph chart `x₁ = u₆`, `x₂ = F(u₁+u₂, u₃+u₄) − u₆`, `x₃.. = u₁..u₅` with
/// `J̃ = diag(p−σ, p−σ, σ, …)`.
pub fn graph_instance(seed: u64, (p, q): (i64, i64), f: &str) -> Manifest {
    let comps = vec![
        "u6".to_string(),
        format!("({f}) - u6"),
        "u1".into(),
        "u2".into(),
        "u3".into(),
        "u4".into(),
        "u5".into(),
    ];
    let mut entries = vec![Num::Expr("p-sigma".into()); 2];
    entries.extend(std::iter::repeat(Num::Expr("sigma".into())).take(5));
    chart_manifest(
        format!("graph-{seed}"),
        vec![-1, 1, -1, 1, -1, 1, 1],
        (p, q),
        StructureSpec::Diagonal { entries },
        comps,
        vec![[-0.3, 0.3]; 6],
        seed,
    )
}

/// Cone chart `(u₁(1+u₂²), 2u₁u₂, u₁(1−u₂²))` in the first three
/// coordinates, the remaining coordinates free; `F` swaps coordinate `k`
/// with `k+3` for `k < 3` and acts by `sign` on the last one.
pub fn cone_copy_instance(seed: u64, (p, q): (i64, i64), sign: i64, shift: [String; 4]) -> Manifest {
    let n = 7;
    let mut f = vec![vec![Num::Int(0); n]; n];
    for k in 0..3 {
        f[k][k + 3] = Num::Int(1);
        f[k + 3][k] = Num::Int(1);
    }
    f[6][6] = Num::Int(sign);
    let [a, b, c, d] = shift;
    let comps = vec![
        "u1*(1 + u2^2)".to_string(),
        "2*u1*u2".into(),
        "u1*(1 - u2^2)".into(),
        format!("u3 + {a}*u4"),
        format!("u4 + {b}*u5"),
        format!("u5 + {c}*u3"),
        format!("u6 + {d}*u5"),
    ];
    chart_manifest(
        format!("cone-copy-{seed}"),
        vec![-1, 1, 1, -1, 1, 1, 1],
        (p, q),
        StructureSpec::FromProduct {
            f,
            branch: "+".into(),
        },
        comps,
        vec![[0.5, 1.5]; 6],
        seed,
    )
}

/// Randomized member of a curved family, reproducible by seed.
pub fn curved_instance(family: Family, seed: u64) -> Manifest {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pq = pq(&mut rng);
    match family {
        Family::Graph => {
            let c: Vec<String> = (0..5).map(|_| coefficient(&mut rng)).collect();
            let f = format!(
                "{}*(u1+u2) + {}*(u1+u2)^2 + {}*(u3+u4) + {}*(u1+u2)*(u3+u4) + {}*(u3+u4)^2",
                c[0], c[1], c[2], c[3], c[4]
            );
            graph_instance(seed, pq, &f)
        }
        Family::ConeCopy => {
            let sign = if rng.gen_bool(0.5) { 1 } else { -1 };
            let shift = [(); 4].map(|_| coefficient(&mut rng));
            cone_copy_instance(seed, pq, sign, shift)
        }
    }
}
