use std::sync::Arc;

use crate::expr::{parse_expr, validate_coords, Expr, ParseError};

/// A manifold presented as a single named coordinate chart. Everything in
/// the crate is local to one chart, so this is just the coordinate list
/// with validation and parsing attached.
#[derive(Debug, PartialEq, Eq)]
pub struct ChartManifold {
    coords: Vec<String>,
}

impl ChartManifold {
    pub fn new(coords: Vec<String>) -> Result<Arc<Self>, ParseError> {
        validate_coords(&coords)?;
        Ok(Arc::new(ChartManifold { coords }))
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn parse(&self, src: &str) -> Result<Expr, ParseError> {
        parse_expr(src, &self.coords)
    }

    pub fn render(&self, e: &Expr) -> String {
        e.render(&self.coords)
    }
}
