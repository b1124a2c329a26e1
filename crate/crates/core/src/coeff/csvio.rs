//! CSV-backed coefficient tables and weight tables.
//!
//! Per-edge coefficient files carry `z,alpha,beta` rows (header optional);
//! the asymptotic classes at the edge endpoints come from the vertex kinds,
//! exactly like tabulated contour integrals, so the guard bands near the
//! endpoints evaluate analytically.

use std::sync::Arc;

use super::table::PchipTable;
use super::{AsymptoticClass, CoefficientField, EdgeEndpoints, EndpointSpec};
use crate::field::{Field1D, FnField, ScalarField};
use crate::graph::{Edge, MetricGraph, VertexKind};
use crate::{Error, Result};

/// Endpoint classes implied by the vertex kinds: `(alpha classes, beta
/// classes)` for one edge.
pub fn classes_from_vertex_kinds(g: &MetricGraph, e: &Edge) -> (EdgeEndpoints, EdgeEndpoints) {
    let class_of = |v: crate::graph::VertexId| -> (AsymptoticClass, AsymptoticClass) {
        match g.vertex(v).kind {
            VertexKind::Exterior | VertexKind::TruncationBoundary => {
                (AsymptoticClass::LinearVanishing, AsymptoticClass::Constant)
            }
            VertexKind::Interior => (AsymptoticClass::Constant, AsymptoticClass::LogBlowup),
            VertexKind::Infinity => (AsymptoticClass::LinearGrowth, AsymptoticClass::Constant),
        }
    };
    let (a_lo, b_lo) = class_of(e.v_at_a);
    let (a_hi, b_hi) = class_of(e.v_at_b);
    (
        EdgeEndpoints::new(EndpointSpec::new(a_lo, 1.0), EndpointSpec::new(a_hi, 1.0)),
        EdgeEndpoints::new(EndpointSpec::new(b_lo, 1.0), EndpointSpec::new(b_hi, 1.0)),
    )
}

fn parse_rows(text: &str, n_cols: usize) -> Result<Vec<Vec<f64>>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.iter().any(|c| c.parse::<f64>().is_err()) {
            if lineno == 0 {
                continue; // header
            }
            return Err(Error::BadCoefficient(format!(
                "CSV line {}: non-numeric cell in `{line}`",
                lineno + 1
            )));
        }
        if cells.len() != n_cols {
            return Err(Error::BadCoefficient(format!(
                "CSV line {}: expected {n_cols} columns, got {}",
                lineno + 1,
                cells.len()
            )));
        }
        rows.push(cells.iter().map(|c| c.parse().unwrap()).collect());
    }
    if rows.len() < 4 {
        return Err(Error::BadCoefficient(
            "CSV table needs at least 4 sample rows".into(),
        ));
    }
    if rows.windows(2).any(|w| w[1][0] <= w[0][0]) {
        return Err(Error::BadCoefficient(
            "CSV samples must be strictly increasing in z".into(),
        ));
    }
    Ok(rows)
}

/// Builds `(alpha, beta)` from one `z,alpha,beta` table per edge (texts in
/// edge-id order). Samples must lie strictly inside the edge intervals.
pub fn coefficients_from_csv(g: &MetricGraph, tables: &[String]) -> Result<CoefficientField> {
    if tables.len() != g.edges().len() {
        return Err(Error::BadCoefficient(format!(
            "{} tables for {} edges",
            tables.len(),
            g.edges().len()
        )));
    }
    let mut alpha_edges: Vec<Arc<dyn Field1D>> = Vec::new();
    let mut beta_edges: Vec<Arc<dyn Field1D>> = Vec::new();
    let mut alpha_classes = Vec::new();
    let mut beta_classes = Vec::new();
    for (e, text) in g.edges().iter().zip(tables) {
        let rows = parse_rows(text, 3)?;
        let lo = rows.first().unwrap()[0];
        let hi = rows.last().unwrap()[0];
        if lo <= e.a || hi >= e.b {
            return Err(Error::BadCoefficient(format!(
                "edge {:?}: samples [{lo}, {hi}] must lie strictly inside ({}, {})",
                e.id, e.a, e.b
            )));
        }
        let a_samples: Vec<(f64, f64)> = rows.iter().map(|r| (r[0], r[1])).collect();
        let b_samples: Vec<(f64, f64)> = rows.iter().map(|r| (r[0], r[2])).collect();
        let (ac, bc) = classes_from_vertex_kinds(g, e);
        alpha_edges.push(Arc::new(PchipTable::new(
            &a_samples, e.a, &ac.at_a, e.b, &ac.at_b,
        )));
        beta_edges.push(Arc::new(PchipTable::new(
            &b_samples, e.a, &bc.at_a, e.b, &bc.at_b,
        )));
        alpha_classes.push(ac);
        beta_classes.push(bc);
    }
    let field = CoefficientField {
        alpha: ScalarField::new(alpha_edges),
        beta: ScalarField::new(beta_edges),
        alpha_classes,
        beta_classes,
    };
    field.validate(g)?;
    Ok(field)
}

/// Custom-table weight: `z,gamma` samples on the unbounded edge (constant
/// tails beyond the sampled range), identically one on the bounded edges.
pub fn weight_from_csv(g: &MetricGraph, table: &str) -> Result<ScalarField> {
    let tail = g.unbounded_edge().ok_or(Error::NoUnboundedEdge)?;
    let rows = parse_rows(table, 2)?;
    if rows.iter().any(|r| r[1] <= 0.0) {
        return Err(Error::BadWeightFamily(
            "gamma table values must be positive".into(),
        ));
    }
    let samples: Vec<(f64, f64)> = rows.iter().map(|r| (r[0], r[1])).collect();
    let cls = EndpointSpec::new(AsymptoticClass::Constant, 1.0);
    let pchip = PchipTable::new(&samples, tail.a, &cls, f64::INFINITY, &cls);
    let fields = g
        .edges()
        .iter()
        .map(|e| {
            if e.id == tail.id {
                Arc::new(pchip.clone()) as Arc<dyn Field1D>
            } else {
                Arc::new(FnField::constant(1.0)) as Arc<dyn Field1D>
            }
        })
        .collect();
    Ok(ScalarField::new(fields))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::tests_support::{double_well_graph, half_line};
    use crate::graph::EdgeId;

    #[test]
    fn csv_round_trip_on_the_half_line() {
        let g = half_line();
        let mut text = String::from("z,alpha,beta\n");
        for i in 1..=40 {
            let z = 0.2 * i as f64;
            text.push_str(&format!(
                "{z},{},{}\n",
                4.0 * std::f64::consts::PI * z,
                2.0 * std::f64::consts::PI
            ));
        }
        let field = coefficients_from_csv(&g, &[text]).unwrap();
        for z in [0.5, 1.7, 6.3] {
            let rel = (field.alpha.eval(EdgeId(0), z) - 4.0 * std::f64::consts::PI * z).abs()
                / (4.0 * std::f64::consts::PI * z);
            assert!(rel < 1e-9, "z = {z}: rel {rel}");
        }
        // linear-vanishing class carries alpha to zero at the extremum
        assert!(field.alpha.eval(EdgeId(0), 0.0).abs() < 1e-12);
        assert_eq!(
            field.alpha_classes[0].at_a.class,
            AsymptoticClass::LinearVanishing
        );
    }

    #[test]
    fn csv_rejects_malformed_tables() {
        let g = half_line();
        assert!(coefficients_from_csv(&g, &["z,alpha,beta\n1,2\n".into()]).is_err());
        assert!(coefficients_from_csv(&g, &["1,2,3\n0.5,2,3\n1.5,2,3\n2,2,3\n".into()]).is_err());
        assert!(coefficients_from_csv(&g, &[]).is_err());
        // samples outside the edge interval
        let dw = double_well_graph();
        let bad = "0.5,1,1\n1.5,1,1\n2.5,1,1\n3.5,1,1\n".to_string();
        let tables = vec![bad.clone(), bad.clone(), bad];
        assert!(coefficients_from_csv(&dw, &tables).is_err());
    }

    #[test]
    fn weight_table_anchors_to_one() {
        let g = half_line();
        let mut text = String::from("z,gamma\n");
        for i in 0..=30 {
            let z = 0.1 + 0.5 * i as f64;
            text.push_str(&format!("{z},{}\n", (z + 1.0).powi(-3)));
        }
        let gamma = weight_from_csv(&g, &text).unwrap();
        let k = EdgeId(0);
        assert!((gamma.eval(k, 2.0) - 3.0_f64.powi(-3)).abs() < 1e-4);
        // derivative agrees with finite differences through the table
        let h = 1e-5;
        let fd = (gamma.eval(k, 3.0 + h) - gamma.eval(k, 3.0 - h)) / (2.0 * h);
        assert!((gamma.deriv(k, 3.0) - fd).abs() < 1e-4);
    }
}
