use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, RwLock};

use thiserror::Error;

use super::{Element, ElementId, Link, Schema};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProviderError {
    #[error("unknown element `{0}`")]
    UnknownElement(ElementId),
    #[error("{request} failed: {message}")]
    Failure { request: String, message: String },
}

/// Direct `contains`-children of an element with the containment links that
/// attach them.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Children {
    pub elements: Vec<Element>,
    pub links: Vec<Link>,
}

/// Lazy source of program facts.
///
/// Implementations must be deterministic: identical requests yield identical
/// facts. Wrap a raw extractor in [`CachedProvider`] to get memoization.
pub trait FactProvider: Send + Sync {
    fn schema(&self) -> &Schema;

    fn load_roots(&self) -> Result<Vec<Element>, ProviderError>;

    fn load_children(&self, id: &ElementId) -> Result<Children, ProviderError>;

    /// Outgoing links of `kind` whose source is `id`.
    fn load_links(&self, kind: &str, id: &ElementId) -> Result<Vec<Link>, ProviderError>;

    fn load_element(&self, id: &ElementId) -> Result<Element, ProviderError>;

    /// The `contains`-parent of `id`, `None` for roots.
    fn load_parent(&self, id: &ElementId) -> Result<Option<ElementId>, ProviderError>;
}

/// Counts of requests forwarded to the wrapped provider.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ExtractionStats {
    pub roots: usize,
    pub children: usize,
    pub links: usize,
    pub elements: usize,
    pub parents: usize,
}

#[derive(Default)]
struct Counters {
    roots: AtomicUsize,
    children: AtomicUsize,
    links: AtomicUsize,
    elements: AtomicUsize,
    parents: AtomicUsize,
}

type Memo<K, V> = RwLock<HashMap<K, Result<V, ProviderError>>>;

/// Memoizing wrapper around a raw fact extractor.
///
/// Concurrent first requests for the same key may both reach the inner
/// provider; whichever result lands first is kept and both are identical by
/// the determinism contract.
pub struct CachedProvider<P> {
    inner: P,
    roots: RwLock<Option<Result<Vec<Element>, ProviderError>>>,
    children: Memo<ElementId, Children>,
    links: Memo<(String, ElementId), Vec<Link>>,
    elements: Memo<ElementId, Element>,
    parents: Memo<ElementId, Option<ElementId>>,
    counters: Counters,
}

impl<P: FactProvider> CachedProvider<P> {
    pub fn new(inner: P) -> Self {
        CachedProvider {
            inner,
            roots: RwLock::new(None),
            children: RwLock::default(),
            links: RwLock::default(),
            elements: RwLock::default(),
            parents: RwLock::default(),
            counters: Counters::default(),
        }
    }

    pub fn inner(&self) -> &P {
        &self.inner
    }

    pub fn stats(&self) -> ExtractionStats {
        ExtractionStats {
            roots: self.counters.roots.load(Ordering::Relaxed),
            children: self.counters.children.load(Ordering::Relaxed),
            links: self.counters.links.load(Ordering::Relaxed),
            elements: self.counters.elements.load(Ordering::Relaxed),
            parents: self.counters.parents.load(Ordering::Relaxed),
        }
    }
}

fn memoized<K, V>(
    memo: &Memo<K, V>,
    key: K,
    counter: &AtomicUsize,
    load: impl FnOnce() -> Result<V, ProviderError>,
) -> Result<V, ProviderError>
where
    K: std::hash::Hash + Eq,
    V: Clone,
{
    if let Some(hit) = memo.read().expect("provider cache poisoned").get(&key) {
        return hit.clone();
    }
    counter.fetch_add(1, Ordering::Relaxed);
    let loaded = load();
    memo.write()
        .expect("provider cache poisoned")
        .entry(key)
        .or_insert(loaded)
        .clone()
}

impl<P: FactProvider> FactProvider for CachedProvider<P> {
    fn schema(&self) -> &Schema {
        self.inner.schema()
    }

    fn load_roots(&self) -> Result<Vec<Element>, ProviderError> {
        if let Some(hit) = self.roots.read().expect("provider cache poisoned").as_ref() {
            return hit.clone();
        }
        self.counters.roots.fetch_add(1, Ordering::Relaxed);
        let loaded = self.inner.load_roots();
        self.roots
            .write()
            .expect("provider cache poisoned")
            .get_or_insert(loaded)
            .clone()
    }

    fn load_children(&self, id: &ElementId) -> Result<Children, ProviderError> {
        memoized(&self.children, id.clone(), &self.counters.children, || self.inner.load_children(id))
    }

    fn load_links(&self, kind: &str, id: &ElementId) -> Result<Vec<Link>, ProviderError> {
        memoized(&self.links, (kind.to_string(), id.clone()), &self.counters.links, || {
            self.inner.load_links(kind, id)
        })
    }

    fn load_element(&self, id: &ElementId) -> Result<Element, ProviderError> {
        memoized(&self.elements, id.clone(), &self.counters.elements, || self.inner.load_element(id))
    }

    fn load_parent(&self, id: &ElementId) -> Result<Option<ElementId>, ProviderError> {
        memoized(&self.parents, id.clone(), &self.counters.parents, || self.inner.load_parent(id))
    }
}

impl<P: FactProvider + ?Sized> FactProvider for Arc<P> {
    fn schema(&self) -> &Schema {
        (**self).schema()
    }

    fn load_roots(&self) -> Result<Vec<Element>, ProviderError> {
        (**self).load_roots()
    }

    fn load_children(&self, id: &ElementId) -> Result<Children, ProviderError> {
        (**self).load_children(id)
    }

    fn load_links(&self, kind: &str, id: &ElementId) -> Result<Vec<Link>, ProviderError> {
        (**self).load_links(kind, id)
    }

    fn load_element(&self, id: &ElementId) -> Result<Element, ProviderError> {
        (**self).load_element(id)
    }

    fn load_parent(&self, id: &ElementId) -> Result<Option<ElementId>, ProviderError> {
        (**self).load_parent(id)
    }
}

/// Direct children of `id`, served from the provider's memo when present.
pub fn children(provider: &dyn FactProvider, id: &ElementId) -> Result<Vec<Element>, ProviderError> {
    Ok(provider.load_children(id)?.elements)
}
