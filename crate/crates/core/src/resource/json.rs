//! JSON forms of resources and monotone certificates.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{make_box, BoxTable, ChoiResource, ResourceError, ResourceSpec, SystemKind, SystemSpec};
use crate::hermitian::{CMatrix, C64};

/// Dense complex matrix as separate real and imaginary row-major arrays.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let row = |r: usize, f: fn(&C64) -> f64| (0..m.cols()).map(|c| f(&m[(r, c)])).collect();
        MatrixJson {
            re: (0..m.rows()).map(|r| row(r, |z| z.re)).collect(),
            im: (0..m.rows()).map(|r| row(r, |z| z.im)).collect(),
        }
    }

    pub fn to_matrix(&self) -> Result<CMatrix, ResourceError> {
        let n = self.re.len();
        let square = |rows: &Vec<Vec<f64>>| rows.len() == n && rows.iter().all(|r| r.len() == n);
        if !square(&self.re) || !square(&self.im) {
            return Err(ResourceError::Json("choi must be two square arrays of equal size".into()));
        }
        Ok(CMatrix::from_fn(n, n, |r, c| C64::new(self.re[r][c], self.im[r][c])))
    }
}

#[derive(Serialize, Deserialize)]
struct SystemJson {
    dim: usize,
    kind: SystemKind,
}

#[derive(Serialize, Deserialize)]
struct SpecJson {
    #[serde(rename = "A")]
    a: SystemJson,
    #[serde(rename = "B")]
    b: SystemJson,
    #[serde(rename = "X")]
    x: SystemJson,
    #[serde(rename = "Y")]
    y: SystemJson,
}

#[derive(Serialize, Deserialize)]
struct ResourceJson {
    spec: SpecJson,
    choi: MatrixJson,
}

#[derive(Deserialize)]
struct BoxInner {
    #[serde(rename = "P")]
    p: Vec<Vec<Vec<Vec<f64>>>>,
}

#[derive(Deserialize)]
struct BoxJson {
    #[serde(rename = "box")]
    inner: BoxInner,
}

fn json_err(e: serde_json::Error) -> ResourceError {
    ResourceError::Json(e.to_string())
}

fn system(s: &SystemJson) -> Result<SystemSpec, ResourceError> {
    SystemSpec::new(s.dim, s.kind)
}

fn system_json(s: &SystemSpec) -> SystemJson {
    SystemJson { dim: s.dim(), kind: s.kind() }
}

/// Parses either the Choi form or the box form. The Choi form is paired
/// with its spec but not validated.
pub fn parse_resource(text: &str) -> Result<ChoiResource, ResourceError> {
    let v: Value = serde_json::from_str(text).map_err(json_err)?;
    if v.get("box").is_some() {
        let b: BoxJson = serde_json::from_value(v).map_err(json_err)?;
        return make_box(&BoxTable::from_nested(&b.inner.p)?);
    }
    let r: ResourceJson = serde_json::from_value(v).map_err(json_err)?;
    let spec = ResourceSpec::new(system(&r.spec.a)?, system(&r.spec.b)?, system(&r.spec.x)?, system(&r.spec.y)?);
    ChoiResource::new(spec, r.choi.to_matrix()?)
}

/// Choi form.
pub fn resource_to_json(r: &ChoiResource) -> String {
    let s = r.spec();
    let doc = ResourceJson {
        spec: SpecJson { a: system_json(&s.a), b: system_json(&s.b), x: system_json(&s.x), y: system_json(&s.y) },
        choi: MatrixJson::from_matrix(r.choi()),
    };
    serde_json::to_string_pretty(&doc).expect("serializable")
}

/// Monotone certificate: the optimal noise Choi state and its weight.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateJson {
    pub monotone: String,
    pub value: f64,
    pub exactness: String,
    pub noise_choi: MatrixJson,
    pub scale: f64,
}

pub fn certificate_json(monotone: &str, value: f64, exactness: &str, noise: &CMatrix, scale: f64) -> String {
    let doc = CertificateJson {
        monotone: monotone.to_string(),
        value,
        exactness: exactness.to_string(),
        noise_choi: MatrixJson::from_matrix(noise),
        scale,
    };
    serde_json::to_string_pretty(&doc).expect("serializable")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::resource::{bm2_distributed_povm, pr_table, singlet_assemblage};

    #[test]
    fn choi_form_roundtrip() {
        for r in [singlet_assemblage(true), bm2_distributed_povm()] {
            let back = parse_resource(&resource_to_json(&r)).unwrap();
            assert_eq!(back.spec(), r.spec());
            assert!(back.choi().dist_max(r.choi()) == 0.0);
        }
    }

    #[test]
    fn box_form_parses() {
        let p = pr_table().to_nested();
        let text = serde_json::json!({ "box": { "P": p } }).to_string();
        let r = parse_resource(&text).unwrap();
        assert!(r.choi().dist_max(make_box(&pr_table()).unwrap().choi()) == 0.0);
    }

    #[test]
    fn signaling_box_form_rejected() {
        let p = BoxTable::from_fn(2, 2, 2, 2, |a, b, _, y| if a == y && b == 0 { 1.0 } else { 0.0 }).to_nested();
        let text = serde_json::json!({ "box": { "P": p } }).to_string();
        assert!(matches!(parse_resource(&text), Err(ResourceError::InvalidBox(_))));
    }

    #[test]
    fn schema_violations() {
        assert!(parse_resource("{}").is_err());
        let bad_kind = r#"{"spec":{"A":{"dim":2,"kind":"weird"},"B":{"dim":1,"kind":"trivial"},
            "X":{"dim":1,"kind":"trivial"},"Y":{"dim":1,"kind":"trivial"}},"choi":{"re":[[1,0],[0,0]],"im":[[0,0],[0,0]]}}"#;
        assert!(parse_resource(bad_kind).is_err());
        let bad_dim = r#"{"spec":{"A":{"dim":2,"kind":"classical"},"B":{"dim":1,"kind":"trivial"},
            "X":{"dim":1,"kind":"trivial"},"Y":{"dim":1,"kind":"trivial"}},"choi":{"re":[[1]],"im":[[0]]}}"#;
        assert!(matches!(parse_resource(bad_dim), Err(ResourceError::Dimension(_))));
    }

    #[test]
    fn dim_one_kind_is_normalized() {
        let text = r#"{"spec":{"A":{"dim":2,"kind":"classical"},"B":{"dim":1,"kind":"quantum"},
            "X":{"dim":1,"kind":"classical"},"Y":{"dim":1,"kind":"trivial"}},"choi":{"re":[[0.5,0],[0,0.5]],"im":[[0,0],[0,0]]}}"#;
        let r = parse_resource(text).unwrap();
        assert!(r.spec().b.is_trivial() && r.spec().x.is_trivial());
    }

    #[test]
    fn certificate_roundtrip() {
        let text = certificate_json("abs", 0.25, "Exact(LP)", &CMatrix::identity(2).scale(0.5), 0.25);
        let c: CertificateJson = serde_json::from_str(&text).unwrap();
        assert_eq!(c.monotone, "abs");
        assert_eq!(c.noise_choi.to_matrix().unwrap(), CMatrix::identity(2).scale(0.5));
    }
}
