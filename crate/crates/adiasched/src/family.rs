//! Turn the family flags into a Hamiltonian pair and gap profile.

use adiasched_core::gap::{profile_from_pair, GapProfile};
use adiasched_core::harness::{grover_instance, qlsa_linear_instance, DENSE_GROVER_LIMIT};
use adiasched_core::operators::{build_grover, build_qlsa, CMatrix, HamiltonianPair, HermitianOperator};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{defaults, FamilyArgs, FamilyName};
use crate::error::{invalid, CliResult};
use crate::formats::{read_matrix, read_profile_csv, read_vector};

#[derive(Debug, Clone)]
pub struct Problem {
    pub label: &'static str,
    /// N, κ or the dimension, when the family has one.
    pub size: Option<f64>,
    pub pair: Option<HamiltonianPair>,
    pub profile: GapProfile,
    pub a_norm: f64,
}

/// Identification block embedded in JSON outputs.
#[derive(Debug, Clone, Serialize)]
pub struct ProblemInfo {
    pub family: &'static str,
    pub size: Option<f64>,
    pub dim: Option<usize>,
    pub a_norm: f64,
    pub min_gap: f64,
    pub argmin: f64,
}

impl Problem {
    pub fn info(&self) -> ProblemInfo {
        ProblemInfo {
            family: self.label,
            size: self.size,
            dim: self.pair.as_ref().map(|p| p.dim()),
            a_norm: self.a_norm,
            min_gap: self.profile.min_gap(),
            argmin: self.profile.argmin(),
        }
    }

    pub fn require_pair(&self) -> CliResult<&HamiltonianPair> {
        self.pair.as_ref().ok_or_else(|| {
            invalid(format!("family {} has no Hamiltonian pair; give --family grover/linear --kappa/custom/random", self.label))
        })
    }
}

/// Seeded random Hermitian pair with entries uniform in [−1, 1], rescaled to
/// unit spectral norm.
pub fn random_pair(dim: usize, seed: u64) -> CliResult<HamiltonianPair> {
    if dim < 2 {
        return Err(invalid(format!("--dim must be at least 2, got {dim}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || {
        let mut m = CMatrix::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = Complex64::new(rng.random_range(-1.0..=1.0), 0.0);
            for j in (i + 1)..dim {
                let z = Complex64::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0));
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
            }
        }
        HermitianOperator::new(m)
    };
    let h0 = draw()?;
    let h1 = draw()?;
    Ok(HamiltonianPair::rescaled(h0, h1)?.0)
}

fn sampled(pair: HamiltonianPair, label: &'static str, size: f64, grid: usize) -> CliResult<Problem> {
    let profile = profile_from_pair(&pair, grid)?;
    Ok(Problem {
        label,
        size: Some(size),
        a_norm: pair.diff_norm(),
        pair: Some(pair),
        profile,
    })
}

fn resolve_family(args: &FamilyArgs, need_pair: bool) -> CliResult<Option<Problem>> {
    let grid = args.grid.unwrap_or(defaults::GRID);
    let Some(family) = args.family else {
        return Ok(None);
    };
    let problem = match family {
        FamilyName::Grover => {
            let n = args.n.ok_or_else(|| invalid("--family grover needs --n"))?;
            let profile = GapProfile::grover(n)?;
            let dense = args.dense.unwrap_or(false);
            let marked = args.marked.unwrap_or(defaults::MARKED);
            if marked as u64 >= n {
                return Err(invalid(format!("--marked {marked} is out of range for N = {n}")));
            }
            let pair = match (need_pair, dense) {
                (false, _) => None,
                (true, false) => Some(grover_instance(n, false)?.pair),
                (true, true) if n > DENSE_GROVER_LIMIT => {
                    return Err(invalid(format!("--dense is limited to N <= {DENSE_GROVER_LIMIT}")));
                }
                (true, true) => Some(build_grover(n as usize, marked)?),
            };
            Problem {
                label: "grover",
                size: Some(n as f64),
                a_norm: (1.0 - 1.0 / n as f64).sqrt(),
                pair,
                profile,
            }
        }
        FamilyName::Linear => match (args.kappa, args.alpha, args.beta) {
            (Some(kappa), None, None) => {
                let inst = qlsa_linear_instance(kappa)?;
                Problem {
                    label: "qlsa_linear",
                    size: Some(kappa),
                    a_norm: inst.a_norm(),
                    pair: Some(inst.pair),
                    profile: inst.profile,
                }
            }
            (None, Some(alpha), Some(beta)) => Problem {
                label: "linear",
                size: None,
                a_norm: 1.0,
                pair: None,
                profile: GapProfile::linear(alpha, beta)?,
            },
            _ => return Err(invalid("--family linear needs either --kappa or both --alpha and --beta")),
        },
        FamilyName::Custom => match (&args.h0, &args.h1, &args.matrix, &args.vector) {
            (Some(h0), Some(h1), None, None) => {
                let pair = HamiltonianPair::new(read_matrix(h0)?, read_matrix(h1)?)?;
                let dim = pair.dim() as f64;
                sampled(pair, "custom", dim, grid)?
            }
            (None, None, Some(a), Some(b)) => {
                let a = read_matrix(a)?;
                let pair = build_qlsa(a.matrix(), &read_vector(b)?)?;
                let dim = pair.dim() as f64;
                sampled(pair, "custom", dim, grid)?
            }
            _ => return Err(invalid("--family custom needs --h0 and --h1, or --matrix and --vector")),
        },
        FamilyName::Random => {
            let dim = args.dim.unwrap_or(defaults::DIM);
            let pair = random_pair(dim, args.seed.unwrap_or(defaults::SEED))?;
            sampled(pair, "random", dim as f64, grid)?
        }
    };
    Ok(Some(problem))
}

/// Resolve the problem. `--profile` or `--profile-file` replace the family's
/// own profile; without a family they define a profile-only problem.
pub fn resolve(args: &FamilyArgs, need_pair: bool) -> CliResult<Problem> {
    let override_profile = match (&args.profile, &args.profile_file) {
        (Some(_), Some(_)) => return Err(invalid("give at most one of --profile and --profile-file")),
        (Some(kind), None) => Some(GapProfile::from_kind(kind)?),
        (None, Some(path)) => Some(GapProfile::tabulated(read_profile_csv(path)?)?),
        (None, None) => None,
    };
    let mut problem = match (resolve_family(args, need_pair)?, override_profile) {
        (Some(mut p), Some(profile)) => {
            p.profile = profile;
            p
        }
        (Some(p), None) => p,
        (None, Some(profile)) => Problem {
            label: "profile",
            size: None,
            pair: None,
            a_norm: 1.0,
            profile,
        },
        (None, None) => return Err(invalid("a problem needs --family, --profile or --profile-file")),
    };
    if let Some(a) = args.a_norm {
        if !(a > 0.0 && a.is_finite()) {
            return Err(invalid(format!("--a-norm must be positive, got {a}")));
        }
        problem.a_norm = a;
    }
    if need_pair {
        problem.require_pair()?;
    }
    Ok(problem)
}
