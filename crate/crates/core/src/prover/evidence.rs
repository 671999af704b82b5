//! Reduction attempts and their replayable evidence.

use std::fmt::Write as _;

use crate::choosability::{
    algorithm_a_outcome, happy_order, identify_pair, reduce_with_identified_pair, ListSizeGraph,
};
use crate::fragments::{build_reduction_problem, PlaneFragment, ReductionProblem};

use super::{sha256_hex, ProverError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Heuristic,
    Pair,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Heuristic => "heuristic",
            Method::Pair => "pair",
        }
    }
}

/// Fragment hash, the derived (H, ℓ) and the accepting trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Evidence {
    pub method: Method,
    pub k: i64,
    pub fragment_sha256: String,
    pub graph: ListSizeGraph,
    pub trace: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ReduceOptions {
    /// Overrides the fragment's pivot.
    pub pivot: Option<String>,
    /// Overrides the fragment's distant pairs.
    pub pairs: Vec<(String, String)>,
    /// Colour count; 12 when zero.
    pub k: i64,
}

/// Why an attempt failed, with the inclusion diagnostics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReduceFailure {
    pub graph: ListSizeGraph,
    pub core: Vec<String>,
    pub blocked: Option<String>,
    /// `u: v w ...` for every M(u,v) = 1 off the diagonal.
    pub matrix: Vec<String>,
    pub note: Option<String>,
}

impl ReduceFailure {
    pub fn to_text(&self) -> String {
        let mut out = String::from("failure\ngraph\n");
        out.push_str(&self.graph.to_text());
        out.push_str("end\n");
        let _ = writeln!(out, "core {}", self.core.join(" "));
        if let Some(b) = &self.blocked {
            let _ = writeln!(out, "blocked {b}");
        }
        for row in &self.matrix {
            let _ = writeln!(out, "inclusion {row}");
        }
        if let Some(n) = &self.note {
            let _ = writeln!(out, "note {n}");
        }
        out
    }
}

fn names(h: &ListSizeGraph, mask: u64) -> Vec<String> {
    (0..h.len())
        .filter(|&v| mask >> v & 1 == 1)
        .map(|v| h.name(v).to_string())
        .collect()
}

fn resolve(h: &ListSizeGraph, id: &str) -> Result<usize, ProverError> {
    h.index_of(id)
        .ok_or_else(|| ProverError::Invalid(format!("`{id}` is not an open vertex")))
}

fn problem(frag: &PlaneFragment, opts: &ReduceOptions) -> Result<ReductionProblem, ProverError> {
    let k = if opts.k == 0 { 12 } else { opts.k };
    let mut p = build_reduction_problem(frag, k)?;
    if let Some(v) = &opts.pivot {
        p.pivot = Some(resolve(&p.graph, v)?);
    }
    if !opts.pairs.is_empty() {
        p.pairs = opts
            .pairs
            .iter()
            .map(|(a, b)| Ok((resolve(&p.graph, a)?, resolve(&p.graph, b)?)))
            .collect::<Result<_, ProverError>>()?;
    }
    Ok(p)
}

fn trimmed(lines: Vec<String>) -> Vec<String> {
    lines.into_iter().map(|l| l.trim_end().to_string()).collect()
}

/// Runs the heuristic, then the pair route when a pivot and pairs are known.
pub fn attempt_reduce(
    frag: &PlaneFragment,
    opts: &ReduceOptions,
) -> Result<Result<Evidence, ReduceFailure>, ProverError> {
    let p = problem(frag, opts)?;
    let h = &p.graph;
    let fragment_sha256 = sha256_hex(frag.to_text().as_bytes());
    let outcome = algorithm_a_outcome(h);
    if outcome.choosable {
        let (order, _) = happy_order(h, h.ells());
        let mut trace = vec![format!(
            "strip {}",
            order.iter().map(|&v| h.name(v)).collect::<Vec<_>>().join(" ")
        )];
        trace.push(format!("core {}", names(h, outcome.core).join(" ")));
        if let Some((u, v)) = outcome.witness {
            trace.push(format!("witness {} {}", h.name(u), h.name(v)));
        }
        return Ok(Ok(Evidence {
            method: Method::Heuristic,
            k: p.k,
            fragment_sha256,
            graph: h.clone(),
            trace: trimmed(trace),
        }));
    }
    let mut note = None;
    if let Some(pivot) = p.pivot.filter(|_| !p.pairs.is_empty()) {
        let r = reduce_with_identified_pair(h, pivot, &p.pairs)?;
        if r.reducible {
            let (b, c) = r.pair.expect("pair route");
            let (sub, _) = identify_pair(h, b, c)?;
            let (order, _) = happy_order(&sub, sub.ells());
            let trace = vec![
                format!("pivot {}", h.name(pivot)),
                format!("pair {} {}", h.name(b), h.name(c)),
                format!(
                    "strip {}",
                    order.iter().map(|&v| sub.name(v)).collect::<Vec<_>>().join(" ")
                ),
            ];
            let trace = trimmed(trace);
            return Ok(Ok(Evidence {
                method: Method::Pair,
                k: p.k,
                fragment_sha256,
                graph: h.clone(),
                trace,
            }));
        }
        note = r.note;
    }
    let matrix = outcome
        .matrix
        .as_ref()
        .map(|m| {
            (0..h.len())
                .filter(|&u| outcome.core >> u & 1 == 1)
                .filter_map(|u| {
                    let row = m.row(u) & outcome.core & !(1 << u);
                    (row != 0).then(|| format!("{}: {}", h.name(u), names(h, row).join(" ")))
                })
                .collect()
        })
        .unwrap_or_default();
    Ok(Err(ReduceFailure {
        graph: h.clone(),
        core: names(h, outcome.core),
        blocked: outcome.blocked.map(|v| h.name(v).to_string()),
        matrix,
        note,
    }))
}

fn replay_failed(msg: impl Into<String>) -> ProverError {
    ProverError::EvidenceReplayFailed(msg.into())
}

/// Recomputes the attempt from the fragment and checks that it reproduces
/// the evidence exactly.
pub fn replay(frag: &PlaneFragment, ev: &Evidence) -> Result<(), ProverError> {
    if sha256_hex(frag.to_text().as_bytes()) != ev.fragment_sha256 {
        return Err(replay_failed("fragment hash differs"));
    }
    let mut opts = ReduceOptions {
        k: ev.k,
        ..Default::default()
    };
    for line in &ev.trace {
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks.as_slice() {
            ["pivot", v] => opts.pivot = Some(v.to_string()),
            ["pair", a, b] => opts.pairs = vec![(a.to_string(), b.to_string())],
            _ => {}
        }
    }
    let again = attempt_reduce(frag, &opts)
        .map_err(|e| replay_failed(e.to_string()))?
        .map_err(|f| replay_failed(format!("attempt failed: {}", f.note.unwrap_or_default())))?;
    if again.graph != ev.graph {
        return Err(replay_failed("derived (H, ℓ) differs"));
    }
    if again.method != ev.method || again.trace != ev.trace {
        return Err(replay_failed("accepting trace differs"));
    }
    Ok(())
}

impl Evidence {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "method {}", self.method.as_str());
        let _ = writeln!(out, "k {}", self.k);
        let _ = writeln!(out, "fragment-sha256 {}", self.fragment_sha256);
        out.push_str("graph\n");
        out.push_str(&self.graph.to_text());
        out.push_str("end\n");
        for t in &self.trace {
            let _ = writeln!(out, "trace {t}");
        }
        out
    }

    pub fn parse(text: &str) -> Result<Evidence, ProverError> {
        let bad = |m: &str| ProverError::Parse(format!("evidence: {m}"));
        let mut method = None;
        let mut k = None;
        let mut hash = None;
        let mut graph = None;
        let mut trace = Vec::new();
        let mut lines = text.lines();
        while let Some(line) = lines.next() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (head, rest) = line.split_once(' ').unwrap_or((line, ""));
            match head {
                "method" => {
                    method = Some(match rest {
                        "heuristic" => Method::Heuristic,
                        "pair" => Method::Pair,
                        _ => return Err(bad("unknown method")),
                    })
                }
                "k" => k = Some(rest.parse().map_err(|_| bad("bad k"))?),
                "fragment-sha256" => hash = Some(rest.to_string()),
                "graph" => {
                    let mut body = String::new();
                    for l in lines.by_ref() {
                        if l.trim() == "end" {
                            break;
                        }
                        body.push_str(l);
                        body.push('\n');
                    }
                    graph = Some(ListSizeGraph::parse(&body).map_err(|e| bad(&e.to_string()))?);
                }
                "trace" => trace.push(rest.to_string()),
                _ => return Err(bad(&format!("unexpected line `{line}`"))),
            }
        }
        Ok(Evidence {
            method: method.ok_or_else(|| bad("missing method"))?,
            k: k.ok_or_else(|| bad("missing k"))?,
            fragment_sha256: hash.ok_or_else(|| bad("missing fragment hash"))?,
            graph: graph.ok_or_else(|| bad("missing graph"))?,
            trace,
        })
    }
}
