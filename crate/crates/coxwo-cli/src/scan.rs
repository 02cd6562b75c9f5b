//! Batch statistics over a directory of system specs.

use std::path::{Path, PathBuf};

use coxwo::convexity::{classify, Exactness, Target};
use coxwo::infwords::accumulation_estimate;
use coxwo::weakorder::{decide_join, reduced_word_from, JoinConfig, JoinVerdict};
use coxwo::{par, CoxeterSystem, InfWord, RootSet, RootStore, Subsystem};
use rand::{seq::SliceRandom, Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::{input, load_system, CliError, Config, Output};

const WORD_LEN: usize = 4;
const SUBSET_DEPTH: usize = 2;
const SUBSET_SIZE: usize = 3;

fn join_stats(sys: &CoxeterSystem, rng: &mut ChaCha8Rng, samples: usize, config: &Config) -> Value {
    let jc = JoinConfig {
        budget: config.budget.min(20_000),
        orbit_depth: config.orbit_depth.min(8),
    };
    let (mut exists, mut not_exists, mut unknown) = (0, 0, 0);
    let mut witnesses = std::collections::BTreeMap::<&str, usize>::new();
    for _ in 0..samples {
        let word = |rng: &mut ChaCha8Rng| {
            let len = rng.gen_range(0..=WORD_LEN);
            reduced_word_from(sys, len, |k| rng.gen_range(0..k))
        };
        let (x, y) = (word(rng), word(rng));
        match decide_join(sys, &[x, y], jc) {
            Ok(JoinVerdict::Exists { .. }) => exists += 1,
            Ok(JoinVerdict::NotExists { witness }) => {
                not_exists += 1;
                *witnesses.entry(crate::commands::witness_kind(&witness)).or_default() += 1;
            }
            Ok(JoinVerdict::Unknown { .. }) | Err(_) => unknown += 1,
        }
    }
    json!({"exists": exists, "not_exists": not_exists, "unknown": unknown, "witnesses": witnesses})
}

/// Random small subsets of shallow roots on which the exactly decided flags disagree with
/// the expected equivalences.
fn equivalence_stats(sys: &CoxeterSystem, rng: &mut ChaCha8Rng, samples: usize) -> Value {
    let mut store = RootStore::with_depth(sys.clone(), SUBSET_DEPTH + 2);
    let pool: Vec<_> = store.up_to(SUBSET_DEPTH).iter().map(|r| r.vec.clone()).collect();
    let sub = Subsystem::full(sys);
    let (mut checked, mut violations) = (0, 0);
    for _ in 0..samples {
        let size = rng.gen_range(1..=SUBSET_SIZE.min(pool.len()));
        let set: RootSet = pool.choose_multiple(rng, size).cloned().collect();
        let c = classify(&mut store, Target { set: &set, finite: true, sub: &sub, imaginary: &[] }, SUBSET_DEPTH + 2);
        let flags = [&c.closed, &c.coclosed, &c.convex, &c.coconvex, &c.separable];
        if flags.iter().any(|f| f.exactness != Exactness::Exact) {
            continue;
        }
        checked += 1;
        let peeled = c.peel.as_ref().is_some_and(Result::is_ok);
        if c.biclosed() != peeled || (peeled && !(c.biconvex() && c.separable.value)) {
            violations += 1;
        }
    }
    json!({"checked": checked, "violations": violations})
}

fn is_lorentzian(sys: &CoxeterSystem) -> bool {
    let (pos, zero, neg) = sys.signature();
    sys.rank() == 3 && zero == 0 && neg == 1 && pos == 2
}

/// Connected periodic words and how many of them show a single accumulation cluster.
fn cluster_stats(sys: &CoxeterSystem, rng: &mut ChaCha8Rng, samples: usize, config: &Config) -> Value {
    let (mut probed, mut single) = (0, 0);
    let mut tries = 0;
    while probed < samples && tries < 20 * samples {
        tries += 1;
        let len = rng.gen_range(2..=4);
        let period = reduced_word_from(sys, len, |k| rng.gen_range(0..k));
        let Ok(w) = InfWord::new(sys, Vec::new(), period, 32) else { continue };
        if !w.is_connected(sys) {
            continue;
        }
        let Ok(acc) = accumulation_estimate(sys, &w, 200, config.tol.max(1e-7)) else { continue };
        probed += 1;
        if acc.clusters.len() == 1 {
            single += 1;
        }
    }
    json!({"probed": probed, "single_cluster": single})
}

fn scan_one(path: &Path, index: usize, samples: usize, config: &Config) -> Value {
    let name = path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
    let sys = match load_system(&path.to_string_lossy()) {
        Ok(s) => s,
        Err(CliError::Input(e)) => return json!({"file": name, "error": e}),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(index as u64));
    let mut entry = json!({
        "file": name,
        "rank": sys.rank(),
        "finite": sys.is_finite(),
        "joins": join_stats(&sys, &mut rng, samples, config),
        "equivalence": equivalence_stats(&sys, &mut rng, samples),
    });
    if is_lorentzian(&sys) {
        entry["accumulation"] = cluster_stats(&sys, &mut rng, samples.min(10), config);
    }
    entry
}

pub fn scan(dir: &Path, samples: usize, config: &Config) -> Result<Output, CliError> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| input(format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    let indexed: Vec<(usize, PathBuf)> = files.into_iter().enumerate().collect();
    let systems = par::map(&indexed, |(i, p)| scan_one(p, *i, samples, config));
    let violations: u64 = systems.iter().filter_map(|s| s["equivalence"]["violations"].as_u64()).sum();
    let summary = format!(
        "scanned {} system(s), {violations} equivalence violation(s)",
        systems.len()
    );
    Ok(Output::new(json!({"samples": samples, "systems": systems}), summary))
}
