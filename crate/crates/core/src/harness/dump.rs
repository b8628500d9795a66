//! Plain dumps of a curvature pack and of a background classification.

use serde::Serialize;

use super::report::Format;
use crate::geometry::{CurvaturePack, EinsteinCertificate};
use crate::tensor::ComponentTensor;

/// Values of one tensor, row-major over its slots.
#[derive(Debug, Clone, Serialize)]
pub struct TensorDump {
    pub name: &'static str,
    pub slots: String,
    pub shape: Vec<usize>,
    pub values: Vec<f64>,
}

impl TensorDump {
    fn new(name: &'static str, slots: &str, t: &ComponentTensor<f64>) -> Self {
        TensorDump {
            name,
            slots: slots.into(),
            shape: vec![t.dim(); t.valence().len()],
            values: t.entries().to_vec(),
        }
    }
}

/// Point values of everything a curvature pack holds.
#[derive(Debug, Clone, Serialize)]
pub struct CurvatureDump {
    pub background: String,
    pub dim: usize,
    pub point: Vec<f64>,
    pub scalar_curvature: f64,
    pub tensors: Vec<TensorDump>,
}

impl CurvatureDump {
    pub fn new(background: &str, pack: &CurvaturePack<f64>) -> Self {
        CurvatureDump {
            background: background.into(),
            dim: pack.dim(),
            point: pack.point.clone(),
            scalar_curvature: pack.scalar.value(),
            tensors: vec![
                TensorDump::new("metric", "g_ab", &pack.m.g),
                TensorDump::new("inverse_metric", "g^ab", &pack.m.g_inv),
                TensorDump::new("christoffel", "Γ^c_ab", &pack.gamma.values()),
                TensorDump::new("riemann_mixed", "R_ab^c_d", &pack.riem_mixed.values()),
                TensorDump::new("riemann", "R_abcd", &pack.riem_low.values()),
                TensorDump::new("ricci", "R_bd", &pack.ricci.values()),
                TensorDump::new("nabla_riemann", "∇_e R_abcd", &pack.nabla_riem.values()),
            ],
        }
    }

    pub fn emit(&self, format: Format) -> String {
        match format {
            Format::Json => json(self),
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(["tensor", "index", "value"]).expect("csv row");
                w.write_record(["scalar_curvature", "", &format!("{:?}", self.scalar_curvature)])
                    .expect("csv row");
                for t in &self.tensors {
                    for (k, v) in t.values.iter().enumerate() {
                        let idx = multi_index(k, &t.shape);
                        w.write_record([t.name, &idx, &format!("{v:?}")]).expect("csv row");
                    }
                }
                String::from_utf8(w.into_inner().expect("csv flush")).expect("utf-8")
            }
            Format::Text => {
                let mut s = format!(
                    "{} (dim {}) at {:?}\nscalar curvature R = {}\n",
                    self.background, self.dim, self.point, self.scalar_curvature
                );
                for t in &self.tensors {
                    s.push_str(&format!("\n{} {}\n", t.name, t.slots));
                    for (k, v) in t.values.iter().enumerate() {
                        if *v != 0.0 {
                            s.push_str(&format!("  [{}] {v:.15e}\n", multi_index(k, &t.shape)));
                        }
                    }
                }
                s
            }
        }
    }
}

fn multi_index(mut k: usize, shape: &[usize]) -> String {
    let mut idx = vec![0; shape.len()];
    for (slot, n) in shape.iter().enumerate().rev() {
        idx[slot] = k % n;
        k /= n;
    }
    idx.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" ")
}

fn json(v: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("dump serialises");
    s.push('\n');
    s
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassificationDump {
    pub background: String,
    pub dim: usize,
    pub seed: u64,
    #[serde(flatten)]
    pub certificate: EinsteinCertificate,
}

impl ClassificationDump {
    pub fn emit(&self, format: Format) -> String {
        let c = &self.certificate;
        let rows: Vec<(&str, String)> = vec![
            ("background", self.background.clone()),
            ("dim", self.dim.to_string()),
            ("seed", self.seed.to_string()),
            ("is_einstein", c.is_einstein.to_string()),
            ("lambda", format!("{:?}", c.lambda)),
            ("lambda_spread", format!("{:?}", c.lambda_spread)),
            ("einstein_residual", format!("{:?}", c.einstein_residual)),
            ("is_constant_curvature", c.is_constant_curvature.to_string()),
            ("kappa", format!("{:?}", c.kappa)),
            ("kappa_spread", format!("{:?}", c.kappa_spread)),
            ("cc_residual", format!("{:?}", c.cc_residual)),
            ("signature", format!("({}, {})", c.signature.0, c.signature.1)),
            ("signature_constant", c.signature_constant.to_string()),
            ("samples", c.samples.to_string()),
        ];
        match format {
            Format::Json => json(self),
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(rows.iter().map(|r| r.0)).expect("csv row");
                w.write_record(rows.iter().map(|r| r.1.as_str())).expect("csv row");
                String::from_utf8(w.into_inner().expect("csv flush")).expect("utf-8")
            }
            Format::Text => rows.iter().map(|(k, v)| format!("{k:<22} {v}\n")).collect(),
        }
    }
}

/// Several classifications: a JSON array, one CSV table or text blocks.
pub fn emit_classifications(dumps: &[ClassificationDump], format: Format) -> String {
    match format {
        Format::Json => json(&dumps),
        Format::Csv => dumps
            .iter()
            .enumerate()
            .flat_map(|(i, d)| {
                let s = d.emit(Format::Csv);
                s.lines().skip(usize::from(i > 0)).map(|l| format!("{l}\n")).collect::<Vec<_>>()
            })
            .collect(),
        Format::Text => dumps
            .iter()
            .map(|d| d.emit(Format::Text))
            .collect::<Vec<_>>()
            .join("\n"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::curvature_pack;
    use crate::metric_dsl::{builtin_background, default_params};

    #[test]
    fn curvature_dump_of_the_round_sphere() {
        let s = builtin_background("sphere", 2, &default_params("sphere")).unwrap();
        let pack = curvature_pack::<f64>(&s, &[1.0, 0.5], 4).unwrap();
        let d = CurvatureDump::new("sphere", &pack);
        assert!((d.scalar_curvature - 2.0).abs() < 1e-12);
        let v: serde_json::Value = serde_json::from_str(&d.emit(Format::Json)).unwrap();
        assert_eq!(v["tensors"][4]["shape"], serde_json::json!([2, 2, 2, 2]));
        let csv = d.emit(Format::Csv);
        assert!(csv.lines().any(|l| l.starts_with("riemann,0 1 0 1,")));
        assert_eq!(multi_index(5, &[2, 2, 2]), "1 0 1");
    }
}
