//! Random containment hierarchies with call links, and a set-based model of
//! slice membership to check slices against.

use std::collections::{BTreeMap, BTreeSet};

use pcw_core::slice::{Kind, MemoryProvider, Schema};
use rand::Rng;

const KINDS: [&str; 4] = ["Project", "Namespace", "Class", "Method"];

pub struct Hierarchy {
    pub provider: MemoryProvider,
    /// Element id to its parent, for non-roots.
    pub parents: BTreeMap<String, String>,
    pub kinds: BTreeMap<String, &'static str>,
    /// `(source, target)` of every non-containment link.
    pub links: Vec<(String, String)>,
}

impl Hierarchy {
    pub fn ids(&self) -> Vec<String> {
        self.kinds.keys().cloned().collect()
    }

    /// `ids` closed under parents.
    pub fn close(&self, ids: impl IntoIterator<Item = String>) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for id in ids {
            let mut cur = Some(id);
            while let Some(c) = cur {
                cur = self.parents.get(&c).cloned();
                out.insert(c);
            }
        }
        out
    }

    /// Link-membership and ancestor-closure violations for a slice with the
    /// given elements and `(source, target, is_containment)` links.
    pub fn violations(&self, members: &BTreeSet<String>, links: &[(String, String, bool)]) -> Vec<String> {
        let mut out = Vec::new();
        for (s, t, _) in links {
            if !members.contains(s) || !members.contains(t) {
                out.push(format!("link {s} -> {t} leaves the slice"));
            }
        }
        for m in members {
            if let Some(p) = self.parents.get(m) {
                if !members.contains(p) {
                    out.push(format!("parent {p} of {m} missing"));
                } else if !links.iter().any(|(s, t, c)| *c && s == p && t == m) {
                    out.push(format!("containment {p} -> {m} missing"));
                }
            }
        }
        let expected_calls = self.links.iter().filter(|(s, t)| members.contains(s) && members.contains(t)).count();
        let actual_calls = links.iter().filter(|(_, _, c)| !c).count();
        if expected_calls != actual_calls {
            out.push(format!("expected {expected_calls} call links between members, found {actual_calls}"));
        }
        out
    }
}

/// Up to `max_elements` elements in a four-level hierarchy with random
/// `calls` links between methods.
pub fn random_hierarchy(rng: &mut impl Rng, max_elements: usize) -> Hierarchy {
    let schema = Schema::define(KINDS.iter().map(|k| Kind::new(*k)).collect(), vec![Kind::new("calls")])
        .expect("static schema");
    let mut provider = MemoryProvider::new(schema);
    let mut parents = BTreeMap::new();
    let mut kinds: BTreeMap<String, &'static str> = BTreeMap::new();
    let mut by_level: Vec<Vec<String>> = vec![Vec::new(); KINDS.len()];
    let total = rng.random_range(1..=max_elements);
    for i in 0..total {
        let level = if by_level[0].is_empty() { 0 } else { rng.random_range(0..KINDS.len()) };
        let level = (0..=level).rev().find(|&l| l == 0 || !by_level[l - 1].is_empty()).unwrap_or(0);
        let parent = (level > 0).then(|| by_level[level - 1][rng.random_range(0..by_level[level - 1].len())].clone());
        let id = match &parent {
            Some(p) => format!("{p}/e{i}"),
            None => format!("e{i}"),
        };
        provider.add_element(&id, KINDS[level], parent.as_deref());
        if let Some(p) = parent {
            parents.insert(id.clone(), p);
        }
        kinds.insert(id.clone(), KINDS[level]);
        by_level[level].push(id);
    }
    let methods = &by_level[3];
    let mut links = Vec::new();
    if !methods.is_empty() {
        for _ in 0..rng.random_range(0..=methods.len() * 2) {
            let s = methods[rng.random_range(0..methods.len())].clone();
            let t = methods[rng.random_range(0..methods.len())].clone();
            provider.add_link("calls", &s, &t);
            links.push((s, t));
        }
    }
    Hierarchy { provider, parents, kinds, links }
}
