//! Two-dimensional maps of journal centroids: PCA pre-reduction, exact
//! tSNE, and an SVG scatter colored by publisher.

mod pca;
mod svg;
mod tsne;

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

pub use pca::{pca, Pca};
pub use svg::{default_color_map, render_scatter, FALLBACK_COLOR, HEIGHT, MARGIN_FRACTION, RADIUS, WIDTH};
pub use tsne::{joint_probabilities, kl_divergence, kl_gradient, tsne, ProjectionConfig, TsneResult};

use crate::evalrank::JournalCentroid;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectedPoint {
    pub journal_id: String,
    pub x: f64,
    pub y: f64,
    pub publisher: String,
    pub n_docs: usize,
}

/// PCA to at most `pca_dims` (and at most `n - 1`) dimensions, then tSNE.
pub fn project_vectors(vectors: &[Vec<f64>], config: &ProjectionConfig) -> Result<TsneResult> {
    let n = vectors.len();
    config.validate(n)?;
    let dim = vectors[0].len();
    let k = config.pca_dims.min(n - 1).min(dim);
    if k < dim {
        let reduced = pca(vectors, k)?;
        tsne(&reduced.projected, config)
    } else {
        tsne(vectors, config)
    }
}

/// Projects journal centroids; `publishers` maps journal id to publisher
/// (missing entries become "unknown").
pub fn project_journals(
    centroids: &[JournalCentroid],
    publishers: &BTreeMap<String, String>,
    config: &ProjectionConfig,
) -> Result<Vec<ProjectedPoint>> {
    let vectors: Vec<Vec<f64>> = centroids.iter().map(|c| c.vector.to_dense()).collect();
    let result = project_vectors(&vectors, config)?;
    Ok(centroids
        .iter()
        .zip(result.embedding)
        .map(|(c, [x, y])| ProjectedPoint {
            journal_id: c.journal_id.clone(),
            x,
            y,
            publisher: publishers.get(&c.journal_id).cloned().unwrap_or_else(|| "unknown".into()),
            n_docs: c.n_docs,
        })
        .collect())
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// `journal_id,x,y,publisher,n_docs` rows.
pub fn write_coordinates_csv<W: Write>(points: &[ProjectedPoint], mut w: W) -> Result<()> {
    writeln!(w, "journal_id,x,y,publisher,n_docs")?;
    for p in points {
        if !(p.x.is_finite() && p.y.is_finite()) {
            return Err(Error::invalid(format!("non-finite coordinates for {}", p.journal_id)));
        }
        writeln!(
            w,
            "{},{},{},{},{}",
            csv_field(&p.journal_id),
            p.x,
            p.y,
            csv_field(&p.publisher),
            p.n_docs
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_quoting() {
        let p = ProjectedPoint {
            journal_id: "j,1".into(),
            x: 0.5,
            y: -1.0,
            publisher: "Wiley".into(),
            n_docs: 3,
        };
        let mut out = Vec::new();
        write_coordinates_csv(&[p], &mut out).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "journal_id,x,y,publisher,n_docs\n\"j,1\",0.5,-1,Wiley,3\n"
        );
    }
}
