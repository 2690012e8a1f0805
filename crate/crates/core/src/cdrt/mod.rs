//! Sampling-based checks of the structural conditions that make a
//! free-state set define its free channels through Choi matrices.
//!
//! Sampling can only falsify: a pass means "no violation in N samples".

use serde::{Deserialize, Serialize};

use crate::choi::{apply_linear, choi_state_dims, swap_tensor_product, ChoiMatrix};
use crate::error::{Error, Result};
use crate::linalg::{partial_trace, permute_systems, ComplexMatrix, DimVector};
use crate::theories::{FreeSet, Membership, Rng, Sampler, DEFAULT_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Condition {
    /// Φ/d is free.
    ConditionOne,
    /// d_A μ * ρ is free for free μ, ρ.
    ConditionTwo,
    /// Free states are closed under ⊗, partial trace and swaps.
    MinimalClosure,
    /// Choi-defined free ⇔ completely resource non-generating.
    CrngEquivalence,
}

impl std::fmt::Display for Condition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Condition::ConditionOne => "condition-one",
            Condition::ConditionTwo => "condition-two",
            Condition::MinimalClosure => "minimal-closure",
            Condition::CrngEquivalence => "crng-equivalence",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Unsupported,
}

/// A state that failed membership, with enough context to replay it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub description: String,
    /// The state whose membership failed.
    pub state: ComplexMatrix,
    pub dims: DimVector,
    pub margin: f64,
    pub tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel: Option<ChoiMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<ComplexMatrix>,
}

/// Evidence collected by [`check_crng_equivalence`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrngEvidence {
    /// Membership of the renormalized Choi matrix.
    pub choi_defined_free: bool,
    pub choi_margin: f64,
    pub probes: usize,
    pub violations: usize,
    /// Whether the Φ/d probe itself produced a non-free output.
    pub choi_probe_violates: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub theory: String,
    pub condition: Condition,
    pub dims: Vec<DimVector>,
    pub samples: usize,
    pub seed: Option<u64>,
    pub tol: f64,
    pub verdict: Verdict,
    /// Smallest membership margin seen (NaN-free; +∞ if nothing was tested).
    pub worst_margin: f64,
    pub detail: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Counterexample>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crng: Option<CrngEvidence>,
}

impl VerificationReport {
    fn new(theory: &dyn FreeSet, condition: Condition, dims: Vec<DimVector>, seed: Option<u64>, tol: f64) -> Self {
        Self {
            theory: theory.name(),
            condition,
            dims,
            samples: 0,
            seed,
            tol,
            verdict: Verdict::Pass,
            worst_margin: f64::INFINITY,
            detail: String::new(),
            counterexample: None,
            crng: None,
        }
    }

    fn unsupported(mut self, e: &Error) -> Self {
        self.verdict = Verdict::Unsupported;
        self.detail = e.to_string();
        self
    }

    /// Records one membership result; the first failure becomes the counterexample.
    fn record(&mut self, m: &Membership, make: impl FnOnce() -> Counterexample) {
        self.worst_margin = self.worst_margin.min(m.margin);
        if !m.member && self.counterexample.is_none() {
            self.verdict = Verdict::Fail;
            self.counterexample = Some(make());
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

fn is_unsupported(e: &Error) -> bool {
    matches!(e, Error::UnsupportedDimension(_) | Error::DimensionMismatch(_))
}

/// Re-runs the membership test stored in a counterexample.
pub fn replay(theory: &dyn FreeSet, cx: &Counterexample) -> Result<Membership> {
    theory.membership(&cx.state, &cx.dims, cx.tol)
}

/// Φ/d on `dims ⊗ dims` (the theory's grouping of a system with its copy).
pub fn normalized_choi_state(dims: &DimVector) -> (ComplexMatrix, DimVector) {
    let phi = choi_state_dims(dims);
    let d = dims.total() as f64;
    (phi.matrix().scale(1.0 / d), phi.dims())
}

/// Whether the maximally entangled state Φ/d on a system and its copy is free.
pub fn check_condition_one(theory: &dyn FreeSet, dims: &DimVector, tol: f64) -> VerificationReport {
    let mut rep = VerificationReport::new(theory, Condition::ConditionOne, vec![dims.clone()], None, tol);
    let (state, sdims) = normalized_choi_state(dims);
    match theory.membership(&state, &sdims, tol) {
        Ok(m) => {
            rep.samples = 1;
            rep.record(&m, || Counterexample {
                description: "maximally entangled state is not free".into(),
                state: state.clone(),
                dims: sdims.clone(),
                margin: m.margin,
                tol,
                sample: None,
                channel: None,
                input: None,
            });
            rep.detail = format!("margin {:.6e}", m.margin);
            rep
        }
        Err(e) if is_unsupported(&e) => rep.unsupported(&e),
        Err(e) => {
            rep.verdict = Verdict::Fail;
            rep.detail = format!("membership error: {e}");
            rep
        }
    }
}

/// Samples free channels μ and free states ρ and tests d_A μ * ρ.
pub fn check_condition_two(
    theory: &dyn FreeSet,
    in_dims: &DimVector,
    out_dims: &DimVector,
    n_samples: usize,
    seed: u64,
    tol: f64,
) -> VerificationReport {
    check_condition_two_with(theory, in_dims, out_dims, n_samples, seed, tol, |t, rng, _| {
        t.sample_channel(in_dims, out_dims, rng)
    })
}

/// As [`check_condition_two`], with a custom channel sampler (for negative
/// controls). The closure gets the theory, the generator and the sample index.
pub fn check_condition_two_with(
    theory: &dyn FreeSet,
    in_dims: &DimVector,
    out_dims: &DimVector,
    n_samples: usize,
    seed: u64,
    tol: f64,
    mut channel_sampler: impl FnMut(&dyn FreeSet, &mut Rng, usize) -> Result<ChoiMatrix>,
) -> VerificationReport {
    let mut rep = VerificationReport::new(
        theory,
        Condition::ConditionTwo,
        vec![in_dims.clone(), out_dims.clone()],
        Some(seed),
        tol,
    );
    let mut sampler = Sampler::new(theory, seed);
    for i in 0..n_samples {
        let step = (|| -> Result<()> {
            let mu = channel_sampler(theory, sampler.rng(), i)?;
            let rho = sampler.state(in_dims)?;
            let out = apply_linear(&mu, &rho).hermitize();
            let m = theory.membership(&out, out_dims, tol)?;
            rep.samples += 1;
            rep.record(&m, || Counterexample {
                description: format!("free channel applied to free state left the free set (sample {i})"),
                state: out.clone(),
                dims: out_dims.clone(),
                margin: m.margin,
                tol,
                sample: Some(i),
                channel: Some(mu.clone()),
                input: Some(rho.clone()),
            });
            Ok(())
        })();
        match step {
            Ok(()) => {}
            Err(e) if is_unsupported(&e) => return rep.unsupported(&e),
            Err(e) => {
                rep.verdict = Verdict::Fail;
                rep.detail = format!("sample {i}: {e}");
                return rep;
            }
        }
        if rep.verdict == Verdict::Fail {
            break;
        }
    }
    if rep.verdict == Verdict::Pass {
        rep.detail = format!("no violation in {} samples", rep.samples);
    }
    rep
}

/// How swaps are applied in [`check_minimal_closure_with`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SwapBookkeeping {
    /// Permute whole local systems (correct).
    Units,
    /// Permute raw tensor factors as if each were a local system; breaks the
    /// grouping for paired theories. Negative control only.
    Factor,
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for k in 0..=p.len() {
            let mut q = p.clone();
            q.insert(k, n - 1);
            out.push(q);
        }
    }
    out
}

/// Factor permutation moving whole units.
fn unit_perm(units: &[Vec<usize>], order: &[usize]) -> Vec<usize> {
    order.iter().flat_map(|&u| units[u].iter().copied()).collect()
}

/// Samples pairs of free states and tests their tensor product, every
/// partial trace over one local system of the product, and swaps.
pub fn check_minimal_closure(theory: &dyn FreeSet, dims: &DimVector, n_samples: usize, seed: u64, tol: f64) -> VerificationReport {
    check_minimal_closure_with(theory, dims, n_samples, seed, tol, SwapBookkeeping::Units)
}

pub fn check_minimal_closure_with(
    theory: &dyn FreeSet,
    dims: &DimVector,
    n_samples: usize,
    seed: u64,
    tol: f64,
    swaps: SwapBookkeeping,
) -> VerificationReport {
    let mut rep = VerificationReport::new(theory, Condition::MinimalClosure, vec![dims.clone()], Some(seed), tol);
    let mut sampler = Sampler::new(theory, seed);
    let mut skipped = 0usize;
    for i in 0..n_samples {
        let step = (|| -> Result<()> {
            let a = sampler.state(dims)?;
            let b = sampler.state(dims)?;
            let mut candidates: Vec<(String, ComplexMatrix, DimVector)> = Vec::new();

            // swaps of a single sample
            let units = match swaps {
                SwapBookkeeping::Units => theory.units(dims)?,
                SwapBookkeeping::Factor => (0..dims.len()).map(|k| vec![k]).collect(),
            };
            if units.len() > 1 && units.len() <= 4 {
                for order in permutations(units.len()).into_iter().skip(1) {
                    let perm = unit_perm(&units, &order);
                    let pd = crate::linalg::permute_dims(dims, &perm);
                    candidates.push((format!("swap {order:?}"), permute_systems(&a, dims, &perm)?, pd));
                }
            }

            // tensor product and what can be derived from it
            let pdims = dims.concat(dims);
            let prod = a.kron(&b);
            let punits = theory.units(&pdims)?;
            candidates.push(("tensor product".into(), prod.clone(), pdims.clone()));
            let nu = punits.len();
            for drop in 0..nu {
                let traced = &punits[drop];
                let kept: Vec<usize> = (0..pdims.len()).filter(|k| !traced.contains(k)).collect();
                let kd = DimVector::new(kept.iter().map(|&k| pdims[k]).collect())?;
                candidates.push((format!("partial trace of system {drop}"), partial_trace(&prod, &pdims, traced)?, kd));
            }
            // exchange the two copies
            let order: Vec<usize> = (nu / 2..nu).chain(0..nu / 2).collect();
            let perm = unit_perm(&punits, &order);
            candidates.push(("swap of the two copies".into(), permute_systems(&prod, &pdims, &perm)?, pdims.clone()));

            for (what, st, sd) in candidates {
                match theory.membership(&st, &sd, tol) {
                    Ok(m) => {
                        rep.samples += 1;
                        rep.record(&m, || Counterexample {
                            description: format!("{what} of free states is not free (sample {i})"),
                            state: st.clone(),
                            dims: sd.clone(),
                            margin: m.margin,
                            tol,
                            sample: Some(i),
                            channel: None,
                            input: None,
                        });
                    }
                    Err(e) if is_unsupported(&e) => skipped += 1,
                    Err(e) => return Err(e),
                }
            }
            Ok(())
        })();
        match step {
            Ok(()) => {}
            Err(e) if is_unsupported(&e) => return rep.unsupported(&e),
            Err(e) => {
                rep.verdict = Verdict::Fail;
                rep.detail = format!("sample {i}: {e}");
                return rep;
            }
        }
        if rep.verdict == Verdict::Fail {
            break;
        }
    }
    if rep.samples == 0 && skipped > 0 {
        rep.verdict = Verdict::Unsupported;
        rep.detail = format!("all {skipped} derived states outside the supported dimensions");
    } else if rep.verdict == Verdict::Pass {
        rep.detail = format!("no violation in {} membership tests ({skipped} unsupported skipped)", rep.samples);
    }
    rep
}

/// (ℳ ⊗ id_R)(σ) for σ on `in ⊗ R`.
fn apply_on_first(mu: &ChoiMatrix, sigma: &ComplexMatrix, ref_dims: &DimVector) -> Result<ComplexMatrix> {
    let id = choi_state_dims(ref_dims);
    let joint = swap_tensor_product(&mu.unnormalized(), &id)?;
    Ok(apply_linear(&joint, sigma).hermitize())
}

/// Compares the Choi-defined verdict for `channel` with probes of complete
/// resource non-generation. The probe set always contains Φ/d itself,
/// followed by `n_probe` sampled free states on `in ⊗ in`.
pub fn check_crng_equivalence(
    theory: &dyn FreeSet,
    channel: &ChoiMatrix,
    n_probe: usize,
    seed: u64,
    tol: f64,
) -> Result<VerificationReport> {
    channel.require_channel(crate::choi::DEFAULT_CHANNEL_TOL.max(1e-7))?;
    let mu = channel.renormalized();
    let (ind, outd) = (mu.in_dims().clone(), mu.out_dims().clone());
    let mut rep = VerificationReport::new(theory, Condition::CrngEquivalence, vec![ind.clone(), outd.clone()], Some(seed), tol);
    let cd = match theory.membership(mu.matrix(), &mu.dims(), tol) {
        Ok(m) => m,
        Err(e) if is_unsupported(&e) => return Ok(rep.unsupported(&e)),
        Err(e) => return Err(e),
    };
    let out_probe_dims = outd.concat(&ind);
    let mut ev = CrngEvidence {
        choi_defined_free: cd.member,
        choi_margin: cd.margin,
        probes: 0,
        violations: 0,
        choi_probe_violates: false,
    };
    let mut first_violation: Option<Counterexample> = None;
    let mut worst = f64::INFINITY;
    let mut sampler = Sampler::new(theory, seed);
    let (phi, phi_dims) = normalized_choi_state(&ind);
    for k in 0..=n_probe {
        let sigma = if k == 0 {
            phi.clone()
        } else {
            match sampler.state(&phi_dims) {
                Ok(s) => s,
                Err(e) if is_unsupported(&e) => break,
                Err(e) => return Err(e),
            }
        };
        let out = apply_on_first(&mu, &sigma, &ind)?;
        let m = match theory.membership(&out, &out_probe_dims, tol) {
            Ok(m) => m,
            Err(e) if is_unsupported(&e) => continue,
            Err(e) => return Err(e),
        };
        ev.probes += 1;
        worst = worst.min(m.margin);
        if !m.member {
            ev.violations += 1;
            if k == 0 {
                ev.choi_probe_violates = true;
            }
            if first_violation.is_none() {
                first_violation = Some(Counterexample {
                    description: if k == 0 {
                        "channel acting on half of Φ/d produced a non-free state".into()
                    } else {
                        format!("channel acting on half of free probe {k} produced a non-free state")
                    },
                    state: out,
                    dims: out_probe_dims.clone(),
                    margin: m.margin,
                    tol,
                    sample: Some(k),
                    channel: Some(mu.clone()),
                    input: Some(sigma),
                });
            }
        }
    }
    rep.samples = ev.probes;
    rep.worst_margin = worst;
    let agree = if cd.member { ev.violations == 0 } else { ev.violations > 0 };
    if agree {
        rep.verdict = Verdict::Pass;
        rep.detail = if cd.member {
            format!("free channel; no violation over {} probes", ev.probes)
        } else {
            format!("resourceful channel; {} of {} probes witness it", ev.violations, ev.probes)
        };
    } else {
        rep.verdict = Verdict::Fail;
        rep.detail = if cd.member {
            "Choi matrix is free but a probe left the free set".into()
        } else {
            "Choi matrix is not free but no probe witnessed it".into()
        };
        rep.counterexample = first_violation.clone().or_else(|| {
            Some(Counterexample {
                description: "non-free Choi matrix".into(),
                state: mu.matrix().clone(),
                dims: mu.dims(),
                margin: cd.margin,
                tol,
                sample: None,
                channel: Some(mu.clone()),
                input: None,
            })
        });
    }
    if rep.counterexample.is_none() && !cd.member {
        // keep the witness even on a pass; it is the evidence
        rep.counterexample = first_violation;
    }
    rep.crng = Some(ev);
    Ok(rep)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteOptions {
    pub samples: usize,
    /// Channels per kind (free and resourceful) for the equivalence check.
    pub crng_channels: usize,
    pub crng_probes: usize,
    pub closure_samples: usize,
    pub tol: f64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self { samples: 200, crng_channels: 5, crng_probes: 10, closure_samples: 20, tol: DEFAULT_TOL }
    }
}

/// Runs every check on every dims in the list. Deterministic per seed.
pub fn run_full_suite(theory: &dyn FreeSet, dims_list: &[DimVector], seed: u64, opts: &SuiteOptions) -> Vec<VerificationReport> {
    let mut out = Vec::new();
    for (k, dims) in dims_list.iter().enumerate() {
        let s = seed.wrapping_add(1000 * k as u64);
        out.push(check_condition_one(theory, dims, opts.tol));
        out.push(check_condition_two(theory, dims, dims, opts.samples, s, opts.tol));
        out.push(check_minimal_closure(theory, dims, opts.closure_samples, s + 1, opts.tol));
        let mut sampler = Sampler::new(theory, s + 2);
        for j in 0..opts.crng_channels {
            for resourceful in [false, true] {
                let ch = if resourceful { sampler.resource_channel(dims, dims) } else { sampler.channel(dims, dims) };
                let r = ch.and_then(|c| check_crng_equivalence(theory, &c, opts.crng_probes, s + 3 + j as u64, opts.tol));
                out.push(match r {
                    Ok(r) => r,
                    Err(e) => {
                        let mut r = VerificationReport::new(theory, Condition::CrngEquivalence, vec![dims.clone()], Some(s), opts.tol);
                        if is_unsupported(&e) {
                            r = r.unsupported(&e);
                        } else {
                            r.verdict = Verdict::Fail;
                            r.detail = e.to_string();
                        }
                        r
                    }
                });
            }
        }
    }
    out
}

/// Overall reading of a suite run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub theory: String,
    pub expected_cdrt: bool,
    pub failures: usize,
    pub condition_one_failures: usize,
    /// True iff the outcome matches expectations: no failures for a theory
    /// expected to pass, a condition-one failure for a negative fixture.
    pub ok: bool,
    pub message: String,
}

pub fn summarize(theory: &dyn FreeSet, reports: &[VerificationReport]) -> SuiteSummary {
    let failures = reports.iter().filter(|r| r.verdict == Verdict::Fail).count();
    let c1 = reports
        .iter()
        .filter(|r| r.condition == Condition::ConditionOne && r.verdict == Verdict::Fail)
        .count();
    let expected = theory.expected_cdrt();
    let (ok, message) = if expected {
        if failures == 0 {
            (true, "all checks passed".to_string())
        } else {
            (false, format!("{failures} check(s) failed"))
        }
    } else if c1 > 0 {
        (true, "expected-fail matched: not a Choi-defined theory".to_string())
    } else {
        (false, "negative fixture unexpectedly passed condition one".to_string())
    };
    SuiteSummary { theory: theory.name(), expected_cdrt: expected, failures, condition_one_failures: c1, ok, message }
}
