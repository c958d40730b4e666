use std::collections::HashMap;
use std::sync::Arc;

use crate::model::{Relation, ResearchProduct};

/// Products indexed by id, plus the relations between them.
#[derive(Debug, Clone, Default)]
pub struct Graph {
    products: Vec<Arc<ResearchProduct>>,
    index: HashMap<String, usize>,
    relations: Vec<Relation>,
}

impl Graph {
    /// Builds a graph. When two products share an id the first one wins; the
    /// number of dropped duplicates is returned alongside.
    pub fn new(
        products: impl IntoIterator<Item = ResearchProduct>,
        relations: Vec<Relation>,
    ) -> (Self, usize) {
        let mut graph = Graph {
            relations,
            ..Graph::default()
        };
        let mut dropped = 0;
        for product in products {
            if graph.index.contains_key(&product.id) {
                dropped += 1;
                continue;
            }
            graph.index.insert(product.id.clone(), graph.products.len());
            graph.products.push(Arc::new(product));
        }
        (graph, dropped)
    }

    pub fn product(&self, id: &str) -> Option<&Arc<ResearchProduct>> {
        self.index.get(id).map(|&i| &self.products[i])
    }

    pub fn products(&self) -> &[Arc<ResearchProduct>] {
        &self.products
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    /// Adds inferred relations, skipping any already present.
    pub fn extend_relations(&mut self, extra: impl IntoIterator<Item = Relation>) {
        let mut seen: std::collections::HashSet<Relation> =
            self.relations.iter().cloned().collect();
        for rel in extra {
            if seen.insert(rel.clone()) {
                self.relations.push(rel);
            }
        }
    }
}
