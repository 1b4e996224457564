#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vlnav_core::scene::{load_episodes, Episode, Scene, SceneSet, Viewpoint};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn house() -> Scene {
    Scene::load(fixture("scene.json")).expect("fixture scene")
}

pub fn house_set() -> SceneSet {
    SceneSet::new(vec![house()]).unwrap()
}

pub fn house_episodes() -> Vec<Episode> {
    load_episodes(fixture("episodes.json")).expect("fixture episodes")
}

pub fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Connected random graph: a random spanning tree plus a few chords.
pub fn random_scene(rng: &mut ChaCha8Rng, max_nodes: usize) -> Scene {
    let n = rng.random_range(2..=max_nodes);
    let ids: Vec<String> = (0..n).map(|i| format!("n{i:02}")).collect();
    let viewpoints = ids
        .iter()
        .map(|id| Viewpoint {
            id: id.clone(),
            position: [rng.random_range(0.1..10.0), rng.random_range(0.1..10.0), rng.random_range(0.1..3.0)],
            caption: format!("room {id}"),
            room_type_gt: None,
            detections: vec![],
        })
        .collect();
    let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    for i in 1..n {
        let j = rng.random_range(0..i);
        edges.insert((j, i));
    }
    let chords = rng.random_range(0..=n / 2);
    for _ in 0..chords {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        if a != b {
            edges.insert((a.min(b), a.max(b)));
        }
    }
    let edges = edges.into_iter().map(|(a, b)| (ids[a].clone(), ids[b].clone())).collect();
    Scene::new("random", viewpoints, edges, vec![]).unwrap()
}

/// Shortest simple-path length by exhaustive enumeration over raw scene data.
pub fn enumerate_shortest(scene: &Scene, from: &str, to: &str) -> Option<f64> {
    let mut adj: HashMap<&str, Vec<&str>> = HashMap::new();
    for (a, b) in scene.edges() {
        adj.entry(a.as_str()).or_default().push(b.as_str());
        adj.entry(b.as_str()).or_default().push(a.as_str());
    }
    let pos: HashMap<&str, [f64; 3]> = scene.viewpoints().iter().map(|v| (v.id.as_str(), v.position)).collect();
    fn dfs<'a>(
        u: &'a str,
        to: &str,
        len: f64,
        adj: &HashMap<&'a str, Vec<&'a str>>,
        pos: &HashMap<&str, [f64; 3]>,
        seen: &mut Vec<&'a str>,
        best: &mut Option<f64>,
    ) {
        if u == to {
            *best = Some(best.map_or(len, |b: f64| b.min(len)));
            return;
        }
        for &v in adj.get(u).map(Vec::as_slice).unwrap_or(&[]) {
            if seen.contains(&v) {
                continue;
            }
            seen.push(v);
            dfs(v, to, len + dist(pos[u], pos[v]), adj, pos, seen, best);
            seen.pop();
        }
    }
    let mut best = None;
    let mut seen = vec![from];
    dfs(from, to, 0.0, &adj, &pos, &mut seen, &mut best);
    best
}

/// Character-trigram hashing, written out independently of the library.
pub fn trigram_vector(text: &str) -> Vec<f64> {
    let padded: Vec<char> = format!(" {} ", text.to_lowercase()).chars().collect();
    let mut v = vec![0.0; 256];
    for w in padded.windows(3) {
        let gram: String = w.iter().collect();
        let mut h: u64 = 0xcbf29ce484222325;
        for byte in gram.as_bytes() {
            h ^= u64::from(*byte);
            h = h.wrapping_mul(0x100000001b3);
        }
        v[(h % 256) as usize] += 1.0;
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / norm).collect()
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

/// First index attaining the maximum score.
pub fn brute_argmax(query: &[f64], keys: &[Vec<f64>]) -> usize {
    let scores: Vec<f64> = keys.iter().map(|k| cosine(query, k)).collect();
    let top = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    scores.iter().position(|&s| s == top).unwrap()
}

/// Minimum-inertia split into two nonempty groups, as a set of member sets.
pub fn best_two_partition(points: &[[f64; 3]]) -> BTreeSet<BTreeSet<usize>> {
    let n = points.len();
    assert!((2..=16).contains(&n));
    let sse = |idx: &[usize]| -> f64 {
        let m = idx.len() as f64;
        let mut c = [0.0; 3];
        for &i in idx {
            for d in 0..3 {
                c[d] += points[i][d] / m;
            }
        }
        idx.iter().map(|&i| dist(points[i], c).powi(2)).sum()
    };
    let mut best = (f64::INFINITY, 0u32);
    // Point 0 always sits in group A, so each split is visited once.
    for mask in 0..(1u32 << (n - 1)) {
        let b: Vec<usize> = (1..n).filter(|i| mask & (1 << (i - 1)) != 0).collect();
        if b.is_empty() {
            continue;
        }
        let a: Vec<usize> = (0..n).filter(|i| !b.contains(i)).collect();
        let cost = sse(&a) + sse(&b);
        if cost < best.0 {
            best = (cost, mask);
        }
    }
    let b: BTreeSet<usize> = (1..n).filter(|i| best.1 & (1 << (i - 1)) != 0).collect();
    let a: BTreeSet<usize> = (0..n).filter(|i| !b.contains(i)).collect();
    [a, b].into_iter().collect()
}

#[derive(Debug, Default, PartialEq)]
pub struct ParsedMap {
    /// Cluster id to its labels, in listed order.
    pub clusters: Vec<(usize, Vec<String>)>,
    /// (viewpoint, caption, near cluster) per entry.
    pub entries: Vec<(String, String, Option<usize>)>,
}

/// Hand-written parser for the two-line map text.
pub fn parse_map_text(text: &str) -> Result<ParsedMap, String> {
    let (map_line, nav_line) = text.split_once('\n').ok_or("expected two lines")?;
    if nav_line.contains('\n') {
        return Err("more than two lines".into());
    }
    let mut rest = map_line.strip_prefix("Memory topological map: ").ok_or("bad map prefix")?;
    let mut out = ParsedMap::default();
    while !rest.is_empty() {
        let body = rest.strip_prefix('|').ok_or("cluster must open with |")?;
        let end = body.find("}|").ok_or("unterminated cluster")?;
        let (head, labels) = body[..end].split_once(": {").ok_or("missing ': {'")?;
        let id: usize = head.parse().map_err(|_| format!("bad cluster id {head}"))?;
        let labels = labels.split(", ").map(str::to_string).collect();
        out.clusters.push((id, labels));
        rest = &body[end + 2..];
        rest = rest.strip_prefix(' ').unwrap_or(rest);
    }
    let mut rest = nav_line.strip_prefix("Navigable viewpoints: ").ok_or("bad nav prefix")?;
    while !rest.is_empty() {
        let body = rest.strip_prefix('<').ok_or("entry must open with <")?;
        let end = body.find('>').ok_or("unterminated entry")?;
        let inner = &body[..end];
        let (vp, tail) = inner.split_once(", ").ok_or("missing viewpoint")?;
        let (caption, near) = tail.rsplit_once(", near cluster ").ok_or("missing near cluster")?;
        let near = if near == "none" { None } else { Some(near.parse().map_err(|_| "bad near id")?) };
        out.entries.push((vp.to_string(), caption.to_string(), near));
        rest = &body[end + 1..];
        rest = rest.strip_prefix(' ').unwrap_or(rest);
    }
    Ok(out)
}

pub fn count_by<T: Ord + Clone>(items: impl IntoIterator<Item = T>) -> BTreeMap<T, usize> {
    let mut m = BTreeMap::new();
    for i in items {
        *m.entry(i).or_insert(0) += 1;
    }
    m
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
