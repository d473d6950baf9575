//! Plain-text layout files.
//!
//! ```text
//! n t d m
//! client_id v[0] ... v[d-1]      (m lines)
//! faulty id id ...
//! ```
//!
//! The honest vectors of the ground truth are the received vectors of
//! clients not listed as faulty.

use std::collections::BTreeSet;
use std::fmt::Write;

use fedcent::{ClientId, GroundTruth, Layout};

pub fn format_layout(layout: &Layout, faulty: &BTreeSet<ClientId>) -> String {
    let mut s = format!(
        "{} {} {} {}\n",
        layout.n(),
        layout.t(),
        layout.dim(),
        layout.m()
    );
    for (id, v) in layout.received() {
        write!(s, "{id}").unwrap();
        for x in v {
            write!(s, " {x}").unwrap();
        }
        s.push('\n');
    }
    s.push_str("faulty");
    for id in faulty {
        write!(s, " {id}").unwrap();
    }
    s.push('\n');
    s
}

pub fn parse_layout(text: &str) -> Result<(Layout, GroundTruth), String> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .enumerate();
    let nums = |lineno: usize, s: &str| -> Result<Vec<f64>, String> {
        s.split_whitespace()
            .map(|w| {
                w.parse::<f64>()
                    .map_err(|e| format!("line {}: `{w}`: {e}", lineno + 1))
            })
            .collect()
    };
    let ints = |lineno: usize, s: &str| -> Result<Vec<usize>, String> {
        s.split_whitespace()
            .map(|w| {
                w.parse::<usize>()
                    .map_err(|e| format!("line {}: `{w}`: {e}", lineno + 1))
            })
            .collect()
    };
    let (i, head) = lines.next().ok_or("empty layout file")?;
    let head = ints(i, head)?;
    let [n, t, d, m] = head[..] else {
        return Err("first line must be `n t d m`".into());
    };
    let mut received = Vec::with_capacity(m);
    for _ in 0..m {
        let (i, line) = lines.next().ok_or("fewer vector lines than m")?;
        let (id, rest) = line
            .split_once(char::is_whitespace)
            .ok_or(format!("line {}: no vector", i + 1))?;
        let id: ClientId = id
            .parse()
            .map_err(|e| format!("line {}: client id: {e}", i + 1))?;
        let v = nums(i, rest)?;
        if v.len() != d {
            return Err(format!(
                "line {}: expected {d} coordinates, found {}",
                i + 1,
                v.len()
            ));
        }
        received.push((id, v));
    }
    let (i, last) = lines.next().ok_or("missing `faulty` line")?;
    let ids = last
        .strip_prefix("faulty")
        .ok_or(format!("line {}: expected `faulty ...`", i + 1))?;
    let faulty: BTreeSet<ClientId> = ints(i, ids)?.into_iter().collect();
    if let Some((i, _)) = lines.next() {
        return Err(format!("line {}: trailing content", i + 1));
    }
    let honest = received
        .iter()
        .filter(|(id, _)| !faulty.contains(id))
        .cloned()
        .collect();
    let layout = Layout::new(n, t, received).map_err(|e| e.to_string())?;
    let truth = GroundTruth::new(honest, faulty).map_err(|e| e.to_string())?;
    Ok((layout, truth))
}
