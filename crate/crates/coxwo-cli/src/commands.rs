use coxwo::convexity::{self, Closure, Target};
use coxwo::imagcone::{self, build_k, orbit_sample};
use coxwo::infwords::{accumulation_estimate, compare, InfWord};
use coxwo::weakorder::{self, JoinConfig, JoinVerdict, NonJoinWitness};
use coxwo::{CoxeterSystem, RootSet, RootStore, Subsystem, Vector};
use serde_json::{json, Value};

use crate::{input, CliError, Config, Output};

/// Parse a JSON array of root literals, e.g. `[["1","0"],["1","1"]]`.
pub fn parse_set(sys: &CoxeterSystem, text: &str) -> Result<RootSet, CliError> {
    let value: Value = serde_json::from_str(text).map_err(|e| input(format!("set literal: {e}")))?;
    let items = value.as_array().ok_or_else(|| input("set literal must be a JSON array"))?;
    items
        .iter()
        .map(|item| {
            let coords = item.as_array().ok_or_else(|| input("each root must be an array"))?;
            let strs: Vec<String> = coords
                .iter()
                .map(|c| match c {
                    Value::String(s) => Ok(s.clone()),
                    Value::Number(n) => Ok(n.to_string()),
                    other => Err(input(format!("bad coordinate {other}"))),
                })
                .collect::<Result<_, _>>()?;
            let v = sys.parse_vector(&strs)?;
            if !coxwo::rootstore::is_root(sys, &v) || !v.is_positive() {
                return Err(input(format!("{v} is not a positive root")));
            }
            Ok(v)
        })
        .collect()
}

pub fn set_json<'a>(set: impl IntoIterator<Item = &'a Vector>) -> Value {
    Value::Array(set.into_iter().map(|v| json!(v)).collect())
}

fn parse_words(sys: &CoxeterSystem, words: &[String]) -> Result<Vec<Vec<usize>>, CliError> {
    words
        .iter()
        .map(|w| {
            let word = sys.parse_word(w)?;
            if !weakorder::is_reduced(sys, &word) {
                return Err(input(format!("{w} is not reduced")));
            }
            Ok(word)
        })
        .collect()
}

pub fn define(sys: &CoxeterSystem, config: &Config) -> Result<Output, CliError> {
    let (pos, zero, neg) = sys.signature();
    let json = json!({
        "spec": sys.to_spec(),
        "rank": sys.rank(),
        "field_d": sys.field(),
        "signature": [pos, neg, zero],
        "finite": sys.is_finite(),
        "irreducible": sys.is_irreducible(),
        "depth": config.depth,
    });
    Ok(Output::new(json, format!("{sys}")))
}

pub fn roots(sys: &CoxeterSystem, config: &Config) -> Result<Output, CliError> {
    let store = RootStore::with_depth(sys.clone(), config.depth);
    let roots: Vec<Value> = store
        .roots()
        .iter()
        .map(|r| json!({"root": r.vec, "depth": r.depth}))
        .collect();
    let n = roots.len();
    Ok(Output::new(
        json!({"depth": config.depth, "count": n, "roots": roots}),
        format!("{n} positive roots of depth <= {}", config.depth),
    ))
}

fn join_config(config: &Config) -> JoinConfig {
    JoinConfig {
        budget: config.budget,
        orbit_depth: config.orbit_depth,
    }
}

pub fn witness_kind(w: &NonJoinWitness) -> &'static str {
    match w {
        NonJoinWitness::MultipleMaxima { .. } => "multiple_maxima",
        NonJoinWitness::ImaginaryPoint { .. } => "imaginary_point",
        NonJoinWitness::LimitRoot { .. } => "limit_root",
    }
}

pub fn join(sys: &CoxeterSystem, words: &[String], config: &Config) -> Result<Output, CliError> {
    let xs = parse_words(sys, words)?;
    let verdict = weakorder::decide_join(sys, &xs, join_config(config))?;
    let mut out = match &verdict {
        JoinVerdict::Exists { word, inversions } => Output::new(
            json!({
                "verdict": "exists",
                "word": sys.format_word(word),
                "inversions": inversions.len(),
                "inversion_set": set_json(inversions),
            }),
            format!("join exists: {} of length {}", sys.format_word(word), word.len()),
        ),
        JoinVerdict::NotExists { witness } => {
            let mut detail = serde_json::to_value(witness)?;
            if let NonJoinWitness::ImaginaryPoint { word, .. } = witness {
                detail["word"] = json!(sys.format_word(word));
            }
            if let NonJoinWitness::MultipleMaxima { maxima } = witness {
                detail["maxima"] = json!(maxima.iter().map(|m| sys.format_word(m)).collect::<Vec<_>>());
            }
            Output::new(
                json!({"verdict": "not_exists", "witness": witness_kind(witness), "certificate": detail}),
                format!("no join: certified by {}", witness_kind(witness)),
            )
        }
        JoinVerdict::Unknown { report } => {
            let mut o = Output::new(
                json!({"verdict": "unknown", "report": report}),
                format!("undecided after {} nodes; raise --budget or --orbit-depth", report.nodes),
            );
            o.exhausted = true;
            o
        }
    };
    out.json["budget"] = json!(config.budget);
    Ok(out)
}

pub fn meet(sys: &CoxeterSystem, words: &[String]) -> Result<Output, CliError> {
    let xs = parse_words(sys, words)?;
    let m = weakorder::meet(sys, &xs);
    Ok(Output::new(
        json!({"word": sys.format_word(&m), "length": m.len()}),
        format!("meet: {}", sys.format_word(&m)),
    ))
}

pub fn closure(sys: &CoxeterSystem, set: &str, two: bool, config: &Config) -> Result<Output, CliError> {
    let set = parse_set(sys, set)?;
    let mut store = RootStore::with_depth(sys.clone(), config.depth);
    if two {
        return Ok(match convexity::two_closure(&set, &mut store) {
            Closure::Closure(c) => Output::new(
                json!({"kind": "two", "finite": true, "set": set_json(&c), "size": c.len()}),
                format!("2-closure has {} roots", c.len()),
            ),
            Closure::InfiniteClosure(a, b) => Output::new(
                json!({"kind": "two", "finite": false, "pair": [a, b]}),
                "2-closure is infinite: the pair spans an infinite interval",
            ),
        });
    }
    let full = Subsystem::full(sys);
    let c = convexity::cone_closure(&set, &mut store, config.depth, &full);
    Ok(Output::new(
        json!({"kind": "cone", "depth": config.depth, "set": set_json(&c), "size": c.len()}),
        format!("cone closure within depth {}: {} roots", config.depth, c.len()),
    ))
}

fn imaginary_points(sys: &CoxeterSystem, depth: usize) -> Vec<Vector> {
    let k = build_k(sys);
    if k.point.is_none() {
        return Vec::new();
    }
    orbit_sample(sys, &k, depth)
        .map(|pts| pts.into_iter().map(|p| p.point).collect())
        .unwrap_or_default()
}

pub fn classify(sys: &CoxeterSystem, set: &str, finite: bool, config: &Config) -> Result<Output, CliError> {
    let set = parse_set(sys, set)?;
    let mut store = RootStore::with_depth(sys.clone(), config.depth);
    let full = Subsystem::full(sys);
    let imaginary = imaginary_points(sys, config.orbit_depth.min(3));
    let c = convexity::classify(
        &mut store,
        Target {
            set: &set,
            finite,
            sub: &full,
            imaginary: &imaginary,
        },
        config.depth,
    );
    let summary = format!(
        "biclosed {}, biconvex {}, separable {} (depth {})",
        c.biclosed(),
        c.biconvex(),
        c.separable.value,
        config.depth
    );
    Ok(Output::new(serde_json::to_value(&c)?, summary))
}

pub fn infword(
    sys: &CoxeterSystem,
    literal: &str,
    n: usize,
    other: Option<&str>,
    config: &Config,
) -> Result<Output, CliError> {
    let w = InfWord::parse(sys, literal, n.max(16))?;
    let inversions = w.truncate_inversions(sys, n)?;
    let acc = accumulation_estimate(sys, &w, n.max(64), config.tol.max(1e-7))?;
    let mut json = json!({
        "word": w.format(sys),
        "n": n,
        "letters": sys.format_word(&w.letters(n)),
        "inversions": set_json(&inversions),
        "connected": w.is_connected(sys),
        "accumulation": acc,
    });
    let mut summary = format!(
        "{}: {} accumulation cluster(s), {}",
        w.format(sys),
        acc.clusters.len(),
        if w.is_connected(sys) { "connected" } else { "disconnected" }
    );
    if let Some(o) = other {
        let v = InfWord::parse(sys, o, n.max(16))?;
        let c = compare(sys, &w, &v, n)?;
        summary.push_str(&format!("; compared with {}: {:?}", v.format(sys), c.order));
        json["compare"] = serde_json::to_value(&c)?;
        json["compare"]["other"] = json!(v.format(sys));
    }
    Ok(Output::new(json, summary))
}

pub fn limits(sys: &CoxeterSystem, config: &Config) -> Result<Output, CliError> {
    let mut store = RootStore::new(sys.clone());
    let clusters = imagcone::limit_root_sample(&mut store, config.depth, 2, config.tol.max(1e-3));
    let summary = format!("{} limit cluster(s) from roots of depth near {}", clusters.len(), config.depth);
    Ok(Output::new(
        json!({"depth": config.depth, "tol": config.tol, "clusters": clusters}),
        summary,
    ))
}

pub fn imaginary(sys: &CoxeterSystem, config: &Config) -> Result<Output, CliError> {
    let k = build_k(sys);
    let mut json = json!({"domain": k, "vertices": imagcone::k_vertices(sys)});
    let mut summary = String::from("imaginary domain is empty");
    if k.point.is_some() {
        let orbit = orbit_sample(sys, &k, config.orbit_depth.min(8))?;
        summary = format!(
            "imaginary domain {}; {} orbit points up to word length {}",
            if k.singleton { "is a single point" } else { "has interior" },
            orbit.len(),
            config.orbit_depth.min(8)
        );
        json["orbit"] = Value::Array(
            orbit
                .iter()
                .map(|p| json!({"word": sys.format_word(&p.word), "point": p.point}))
                .collect(),
        );
    }
    Ok(Output::new(json, summary))
}

/// Join existence against the growth of `cone(N(X))` with the window depth.
pub fn probe_join(sys: &CoxeterSystem, words: &[String], config: &Config) -> Result<Output, CliError> {
    if words.is_empty() {
        return Err(input("probe --question 3.5 needs words"));
    }
    let xs = parse_words(sys, words)?;
    let mut nx = RootSet::new();
    for x in &xs {
        nx.extend(weakorder::inversion_set(sys, x)?);
    }
    let full = Subsystem::full(sys);
    let mut store = RootStore::new(sys.clone());
    let depths: Vec<usize> = (1..=3).map(|k| k * config.depth.clamp(2, 8)).collect();
    let sizes: Vec<usize> = depths
        .iter()
        .map(|&d| convexity::cone_closure(&nx, &mut store, d, &full).len())
        .collect();
    let stable = sizes.windows(2).all(|w| w[0] == w[1]);
    let mut out = join(sys, words, config)?;
    let verdict = out.json["verdict"].clone();
    out.json = json!({
        "question": "3.5",
        "cone_sizes": depths.iter().zip(&sizes).map(|(d, s)| json!({"depth": d, "size": s})).collect::<Vec<_>>(),
        "cone_looks_finite": stable,
        "join": out.json,
    });
    out.summary = format!(
        "cone sizes {sizes:?} ({}); join verdict {verdict}",
        if stable { "stable" } else { "growing" }
    );
    Ok(out)
}

/// Orbit points against normalized inversion roots of an infinite word.
pub fn probe_limits(sys: &CoxeterSystem, args: &[String], n: usize, config: &Config) -> Result<Output, CliError> {
    let [literal] = args else {
        return Err(input("probe --conjecture 4.8 needs one infinite word literal"));
    };
    let w = InfWord::parse(sys, literal, 16)?;
    let k = build_k(sys);
    let report = imagcone::probe_orbit_vs_roots(sys, &w, &k, n)?;
    let acc = accumulation_estimate(sys, &w, n.min(400), config.tol.max(1e-7))?;
    let summary = format!(
        "n = {n}: orbit-root distance {:.3e}, {} accumulation cluster(s). {}",
        report.distance,
        acc.clusters.len(),
        report.note
    );
    Ok(Output::new(
        json!({"conjecture": "4.8", "word": w.format(sys), "report": report, "accumulation": acc}),
        summary,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use coxwo::catalog;

    #[test]
    fn set_literals_accept_strings_and_numbers() {
        let sys = catalog::affine_c2();
        let set = parse_set(&sys, r#"[[1, 0, 0], ["1", "rt", "0"]]"#).unwrap();
        assert_eq!(set.len(), 2);
        assert_eq!(set_json(&set).to_string(), r#"[["1","0","0"],["1","0+1*rt","0"]]"#);
    }

    #[test]
    fn non_roots_are_rejected() {
        let sys = catalog::affine_c2();
        assert!(parse_set(&sys, "[[1, 1, 1]]").is_err());
        assert!(parse_set(&sys, "[[-1, 0, 0]]").is_err());
        assert!(parse_set(&sys, "{}").is_err());
    }
}
