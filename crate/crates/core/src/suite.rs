//! Seeded random instances and the batch agreement audit.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::condexp::CondExp;
use crate::criteria::{self, DivergenceKind, Mismatch};
use crate::error::{Error, Result};
use crate::measure::{MeasureSpace, Mfunc, Partition};

/// Upper bound on random function moduli.
pub const MAX_MODULUS: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stratum {
    Generic,
    /// |E(uw)| = 1 on S ∩ G.
    Quasi,
    /// Singleton partition with |uw| = 1.
    SingletonUnimodular,
    /// w = ū with E(|u|²) = 1 on every block.
    UnitSelfAdjoint,
    Fixture,
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub label: String,
    pub stratum: Stratum,
    pub ce: CondExp,
    pub w: Mfunc,
    pub u: Mfunc,
}

/// Per-instance generator: stream `index` of the ChaCha8 generator seeded by `seed`.
pub fn instance_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn random_space<R: Rng>(rng: &mut R, atoms: usize) -> MeasureSpace {
    MeasureSpace::new((0..atoms).map(|_| rng.gen_range(0.05..=1.0)).collect())
        .expect("positive weights")
}

/// Uniformly labelled partition with exactly `blocks` non-empty blocks (`blocks` ≤ atoms).
pub fn random_partition<R: Rng>(rng: &mut R, space: &MeasureSpace, blocks: usize) -> Partition {
    let n = space.atom_count();
    let k = blocks.clamp(1, n);
    let mut atoms: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        atoms.swap(i, rng.gen_range(0..=i));
    }
    let mut labels = vec![0; n];
    for (pos, &a) in atoms.iter().enumerate() {
        labels[a] = if pos < k { pos } else { rng.gen_range(0..k) };
    }
    Partition::from_labels(space, &labels).expect("every label used")
}

/// Modulus uniform in `modulus`, phase uniform.
pub fn random_complex<R: Rng>(rng: &mut R, modulus: RangeInclusive<f64>) -> Complex64 {
    let r = rng.gen_range(modulus);
    let theta = rng.gen_range(0.0..std::f64::consts::TAU);
    Complex64::from_polar(r, theta)
}

pub fn random_function<R: Rng>(rng: &mut R, atoms: usize, modulus: RangeInclusive<f64>) -> Mfunc {
    Mfunc::new(
        (0..atoms)
            .map(|_| random_complex(rng, modulus.clone()))
            .collect(),
    )
}

fn random_ce<R: Rng>(
    rng: &mut R,
    dims: &RangeInclusive<usize>,
    blocks: &RangeInclusive<usize>,
) -> CondExp {
    let n = rng.gen_range(dims.clone());
    let space = random_space(rng, n);
    let k = rng.gen_range(blocks.clone()).min(n);
    let partition = random_partition(rng, &space, k);
    CondExp::new(space, partition).expect("valid partition")
}

fn singleton_ce<R: Rng>(rng: &mut R, dims: &RangeInclusive<usize>) -> CondExp {
    let n = rng.gen_range(dims.clone());
    let space = random_space(rng, n);
    let partition = space.singletons();
    CondExp::new(space, partition).expect("valid partition")
}

/// Rescales `u` block by block so that |E(uw)| = 1 wherever E(uw) ≠ 0, redrawing u on
/// blocks where E(uw) is too small to rescale safely.
fn normalise_quasi<R: Rng>(rng: &mut R, ce: &CondExp, w: &Mfunc, u: Mfunc) -> Mfunc {
    let mut values = u.values().to_vec();
    for (b, block) in ce.partition().blocks().iter().enumerate() {
        loop {
            let uf = Mfunc::new(values.clone());
            let e = ce.block_values(&(&uf * w)).expect("same space")[b];
            if e.norm() > 1e-3 {
                for &a in block {
                    values[a] /= e.norm();
                }
                break;
            }
            for &a in block {
                values[a] = random_complex(rng, 0.0..=MAX_MODULUS);
            }
        }
    }
    Mfunc::new(values)
}

/// One instance of the agreement suite: ½ generic, ¼ quasi stratum, ¼ singleton unimodular.
pub fn random_instance<R: Rng>(
    rng: &mut R,
    dims: &RangeInclusive<usize>,
    blocks: &RangeInclusive<usize>,
) -> Instance {
    let draw: f64 = rng.gen();
    if draw < 0.25 {
        let ce = random_ce(rng, dims, blocks);
        let w = random_function(rng, ce.dim(), 0.0..=MAX_MODULUS);
        let u = random_function(rng, ce.dim(), 0.0..=MAX_MODULUS);
        let u = normalise_quasi(rng, &ce, &w, u);
        Instance {
            label: "quasi".into(),
            stratum: Stratum::Quasi,
            ce,
            w,
            u,
        }
    } else if draw < 0.5 {
        let ce = singleton_ce(rng, dims);
        let w = random_function(rng, ce.dim(), 0.2..=MAX_MODULUS);
        let u = Mfunc::new(
            w.values()
                .iter()
                .map(|&wx| {
                    Complex64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU)) / wx
                })
                .collect(),
        );
        Instance {
            label: "singleton-unimodular".into(),
            stratum: Stratum::SingletonUnimodular,
            ce,
            w,
            u,
        }
    } else {
        generic_instance(rng, dims, blocks)
    }
}

pub fn generic_instance<R: Rng>(
    rng: &mut R,
    dims: &RangeInclusive<usize>,
    blocks: &RangeInclusive<usize>,
) -> Instance {
    let ce = random_ce(rng, dims, blocks);
    let w = random_function(rng, ce.dim(), 0.0..=MAX_MODULUS);
    let u = random_function(rng, ce.dim(), 0.0..=MAX_MODULUS);
    Instance {
        label: "generic".into(),
        stratum: Stratum::Generic,
        ce,
        w,
        u,
    }
}

/// Self-adjoint WCT instance (w = ū): ⅓ generic, ⅓ E(|u|²) ≡ 1 on a random partition,
/// ⅓ unimodular u on singletons.
pub fn self_adjoint_instance<R: Rng>(
    rng: &mut R,
    dims: &RangeInclusive<usize>,
    blocks: &RangeInclusive<usize>,
) -> Instance {
    let draw: f64 = rng.gen();
    let (stratum, ce, u) = if draw < 1.0 / 3.0 {
        let ce = random_ce(rng, dims, blocks);
        let u = random_function(rng, ce.dim(), 0.0..=MAX_MODULUS);
        (Stratum::Generic, ce, u)
    } else if draw < 2.0 / 3.0 {
        let ce = random_ce(rng, dims, blocks);
        let u = random_function(rng, ce.dim(), 0.1..=MAX_MODULUS);
        let e = ce.block_values(&u.abs_sq()).expect("same space");
        let u = Mfunc::new(
            (0..ce.dim())
                .map(|a| u.get(a) / e[ce.partition().block_of(a)].re.sqrt())
                .collect(),
        );
        (Stratum::UnitSelfAdjoint, ce, u)
    } else {
        let ce = singleton_ce(rng, dims);
        let u = random_function(rng, ce.dim(), 1.0..=1.0);
        (Stratum::SingletonUnimodular, ce, u)
    };
    Instance {
        label: format!("self-adjoint/{stratum:?}"),
        stratum,
        w: u.conj(),
        u,
        ce,
    }
}

fn uniform4(blocks: Vec<Vec<usize>>) -> CondExp {
    let space = MeasureSpace::new(vec![0.25; 4]).expect("uniform weights");
    let partition = Partition::new(&space, blocks).expect("valid blocks");
    CondExp::new(space, partition).expect("valid partition")
}

/// u = (1,1,0,0), w = (2,0,0,0) on the uniform 4-atom space with blocks {0,1}, {2,3}:
/// |E(uw)| = 1 on S ∩ G only.
pub fn support_gap_fixture() -> Instance {
    Instance {
        label: "fixture/support-gap".into(),
        stratum: Stratum::Fixture,
        ce: uniform4(vec![vec![0, 1], vec![2, 3]]),
        u: Mfunc::from_real(&[1.0, 1.0, 0.0, 0.0]),
        w: Mfunc::from_real(&[2.0, 0.0, 0.0, 0.0]),
    }
}

/// u = w = 1 with blocks {0,1}, {2,3}: T = E.
pub fn projection_fixture() -> Instance {
    Instance {
        label: "fixture/T=E".into(),
        stratum: Stratum::Fixture,
        ce: uniform4(vec![vec![0, 1], vec![2, 3]]),
        u: Mfunc::ones(4),
        w: Mfunc::ones(4),
    }
}

/// A mismatch with enough data to replay the instance.
#[derive(Debug, Clone, Serialize)]
pub struct Counterexample {
    pub index: usize,
    pub label: String,
    pub weights: Vec<f64>,
    pub blocks: Vec<Vec<usize>>,
    pub u: Vec<[f64; 2]>,
    pub w: Vec<[f64; 2]>,
    pub mismatch: Mismatch,
}

#[derive(Debug, Clone, Serialize)]
pub struct DivergenceRecord {
    pub index: usize,
    pub label: String,
    pub kind: DivergenceKind,
    pub ms: Vec<u32>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteConfig {
    pub count: usize,
    pub dims: RangeInclusive<usize>,
    pub blocks: RangeInclusive<usize>,
    pub seed: u64,
    pub m_max: u32,
    pub rel_tol: Option<f64>,
    /// Append the support-gap and T = E fixtures after the random instances.
    pub fixtures: bool,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            count: 200,
            dims: 2..=10,
            blocks: 1..=4,
            seed: 42,
            m_max: 4,
            rel_tol: None,
            fixtures: true,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StratumSummary {
    pub instances: usize,
    pub corrected_quasi_all_m: usize,
    pub oracle_m_isometric_all_m: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub config: SuiteConfig,
    pub instances: usize,
    pub mismatches: Vec<Counterexample>,
    pub divergences: Vec<DivergenceRecord>,
    pub strata: BTreeMap<Stratum, StratumSummary>,
}

impl SuiteReport {
    pub fn divergence_count(&self, kind: DivergenceKind) -> usize {
        self.divergences.iter().filter(|d| d.kind == kind).count()
    }
}

fn pairs(f: &Mfunc) -> Vec<[f64; 2]> {
    f.values().iter().map(|z| [z.re, z.im]).collect()
}

/// Generates the instances of a suite in index order.
pub fn suite_instances(cfg: &SuiteConfig) -> Vec<Instance> {
    let mut out: Vec<Instance> = (0..cfg.count)
        .map(|i| {
            let mut rng = instance_rng(cfg.seed, i as u64);
            let mut inst = random_instance(&mut rng, &cfg.dims, &cfg.blocks);
            inst.label = format!("{}#{i}", inst.label);
            inst
        })
        .collect();
    if cfg.fixtures {
        out.push(support_gap_fixture());
        out.push(projection_fixture());
    }
    out
}

pub fn run_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    if cfg.count == 0 && !cfg.fixtures {
        return Err(Error::validation(
            "count",
            "suite needs at least one instance",
        ));
    }
    if cfg.dims.is_empty()
        || *cfg.dims.start() == 0
        || cfg.blocks.is_empty()
        || *cfg.blocks.start() == 0
    {
        return Err(Error::validation(
            "range",
            "dimension and block ranges must be non-empty and positive",
        ));
    }
    let instances = suite_instances(cfg);
    let audits: Vec<criteria::AgreementReport> = instances
        .par_iter()
        .map(|inst| criteria::audit_agreement(&inst.ce, &inst.w, &inst.u, cfg.m_max, cfg.rel_tol))
        .collect::<Result<_>>()?;

    let mut mismatches = Vec::new();
    let mut divergences = Vec::new();
    let mut strata: BTreeMap<Stratum, StratumSummary> = BTreeMap::new();
    for (index, (inst, audit)) in instances.iter().zip(&audits).enumerate() {
        for m in &audit.mismatches {
            mismatches.push(Counterexample {
                index,
                label: inst.label.clone(),
                weights: inst.ce.space().weights().to_vec(),
                blocks: inst.ce.partition().blocks().to_vec(),
                u: pairs(&inst.u),
                w: pairs(&inst.w),
                mismatch: m.clone(),
            });
        }
        for d in &audit.divergences {
            divergences.push(DivergenceRecord {
                index,
                label: inst.label.clone(),
                kind: d.kind,
                ms: d.ms.clone(),
            });
        }
        let entry = strata.entry(inst.stratum).or_insert(StratumSummary {
            instances: 0,
            corrected_quasi_all_m: 0,
            oracle_m_isometric_all_m: 0,
        });
        entry.instances += 1;
        if audit.criteria.iter().all(|c| c.corrected_quasi) {
            entry.corrected_quasi_all_m += 1;
        }
        if audit.oracle.iter().all(|v| v.is_m_isometric) {
            entry.oracle_m_isometric_all_m += 1;
        }
    }
    Ok(SuiteReport {
        config: cfg.clone(),
        instances: instances.len(),
        mismatches,
        divergences,
        strata,
    })
}
