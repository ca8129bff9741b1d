//! JSON dumps of catalog filters: prototype knots, index set, coefficient
//! polynomials in the shift, and the prototype convolution matrix.

use psiac::exact::Rational;
use psiac::filter::build_t_uniform;
use psiac::kernel::{
    filter_catalog, shifted_scaled_coefficients, CatalogError, FilterName, Side,
};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DumpError {
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error("singular reproduction system")]
    Singular(#[from] psiac::exact::SingularMatrix),
}

#[derive(Serialize, Debug)]
pub struct QDump {
    pub rows: usize,
    pub cols: usize,
    /// row-major `p/q` strings
    pub entries: Vec<String>,
    /// number of unit cells covered by the filter window
    pub n0: usize,
}

#[derive(Serialize, Debug)]
pub struct FilterDump {
    pub filter: String,
    pub d: usize,
    pub side: String,
    pub degree_k: usize,
    pub repro_degree_r: usize,
    pub prototype_knots: Vec<String>,
    pub index_set: Vec<usize>,
    /// shift constant in prototype units, `None` for the symmetric filter
    pub lambda_rule: Option<String>,
    /// coefficient polynomials in the shift: outer index = kept B-spline,
    /// inner index = power of the shift (prototype scale h = 1)
    pub coefficients: Vec<Vec<String>>,
    /// prototype convolution matrix (uniform unit cells); absent for the
    /// position-independent symmetric filter
    pub q_matrix: Option<QDump>,
}

pub fn dump_filter(name: FilterName, d: usize, side: Side) -> Result<FilterDump, DumpError> {
    let spec = filter_catalog(name, d, side)?;
    let polys = shifted_scaled_coefficients(&spec, &Rational::one())?;
    let coefficients = polys
        .iter()
        .map(|p| {
            (0..=spec.repro_degree())
                .map(|j| p.coeff(j).to_fraction_string())
                .collect()
        })
        .collect();
    let q_matrix = match side {
        Side::Symmetric => None,
        _ => {
            let t = build_t_uniform(&spec, d);
            let q = psiac::filter::q_matrix(&spec, &t)?;
            let n0 = q.rows() / (d + 1);
            Some(QDump {
                rows: q.rows(),
                cols: q.cols(),
                entries: q
                    .entries()
                    .iter()
                    .map(Rational::to_fraction_string)
                    .collect(),
                n0,
            })
        }
    };
    let lambda_rule = match side {
        Side::Left => Some(format!("{} + a/h", spec.knots().last())),
        Side::Right => Some(format!("{} + b/h", spec.knots().first())),
        Side::Symmetric => None,
    };
    Ok(FilterDump {
        filter: name.to_string(),
        d,
        side: side.to_string(),
        degree_k: spec.degree(),
        repro_degree_r: spec.repro_degree(),
        prototype_knots: spec
            .knots()
            .knots()
            .iter()
            .map(Rational::to_fraction_string)
            .collect(),
        index_set: spec.index_set().to_vec(),
        lambda_rule,
        coefficients,
        q_matrix,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_d1_dump_has_classic_coefficients() {
        let dump = dump_filter(FilterName::Symmetric, 1, Side::Symmetric).unwrap();
        let constants: Vec<&str> = dump.coefficients.iter().map(|p| p[0].as_str()).collect();
        assert_eq!(constants, vec!["-1/12", "7/6", "-1/12"]);
        assert!(dump.q_matrix.is_none());
        assert!(dump.lambda_rule.is_none());
    }

    #[test]
    fn multiknot_d1_dump_knots() {
        let dump = dump_filter(FilterName::Multiknot, 1, Side::Left).unwrap();
        assert_eq!(
            dump.prototype_knots,
            vec!["-2/1", "-1/1", "0/1", "1/1", "1/1", "2/1", "2/1"]
        );
        assert_eq!(dump.degree_k, 1);
        assert_eq!(dump.repro_degree_r, 4);
        let q = dump.q_matrix.unwrap();
        assert_eq!(q.cols, 5);
        assert_eq!(q.n0, 4);
    }

    #[test]
    fn rlkv_d2_dump_shows_skipped_indices() {
        let dump = dump_filter(FilterName::Rlkv, 2, Side::Left).unwrap();
        assert_eq!(dump.index_set, vec![0, 1, 2, 3, 4, 6]);
        assert!(serde_json::to_string_pretty(&dump).unwrap().contains("coefficients"));
    }
}
