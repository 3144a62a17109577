//! JSON documents for semigroupoids, actions, bundles and kernels, instance
//! loading with cross-reference and axiom checks, and report output.
//!
//! An instance is either a directory holding `semigroupoid.json`,
//! `action.json`, `bundle.json` and optionally `kernel.json`, or one file
//! with those four documents under the keys `semigroupoid`, `action`,
//! `bundle` and `kernel`.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use indexmap::IndexMap;
use serde::{de::DeserializeOwned, Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bundle::HilbertBundle;
use crate::error::{Error, Result};
use crate::kernel::{ActionFrame, OpKernel};
use crate::numlin::{CMatrix, C64};
use crate::sgpd::{ActionTables, LeftAction, SemigroupoidTables, StarSemigroupoid};

pub const SEMIGROUPOID_FILE: &str = "semigroupoid.json";
pub const ACTION_FILE: &str = "action.json";
pub const BUNDLE_FILE: &str = "bundle.json";
pub const KERNEL_FILE: &str = "kernel.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementDoc {
    pub id: String,
    pub d: String,
    pub c: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SemigroupoidDoc {
    pub symbols: Vec<String>,
    pub elements: Vec<ElementDoc>,
    pub compose: Vec<[String; 3]>,
    pub star: Vec<[String; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub units: Option<IndexMap<String, String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionDoc {
    pub anchor: IndexMap<String, String>,
    pub act: Vec<[String; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleDoc {
    pub dims: IndexMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntryDoc {
    pub row: String,
    pub col: String,
    pub re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelDoc {
    pub field: String,
    pub entries: Vec<EntryDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDoc {
    pub semigroupoid: SemigroupoidDoc,
    pub action: ActionDoc,
    pub bundle: BundleDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelDoc>,
}

/// A validated instance.
#[derive(Debug, Clone)]
pub struct Instance {
    pub semigroupoid: Arc<StarSemigroupoid>,
    pub action: Arc<LeftAction>,
    pub bundle: Arc<HilbertBundle>,
    pub kernel: Option<OpKernel>,
}

impl PartialEq for Instance {
    fn eq(&self, other: &Self) -> bool {
        self.semigroupoid == other.semigroupoid
            && self.action == other.action
            && *self.bundle == *other.bundle
            && self.kernel == other.kernel
    }
}

impl Instance {
    pub fn frame(&self) -> Result<ActionFrame> {
        ActionFrame::new(Arc::clone(&self.action), Arc::clone(&self.bundle))
    }

    pub fn require_kernel(&self) -> Result<&OpKernel> {
        self.kernel.as_ref().ok_or_else(|| Error::CrossRef {
            file: KERNEL_FILE.into(),
            msg: "the instance has no kernel".into(),
        })
    }

    pub fn to_doc(&self) -> InstanceDoc {
        InstanceDoc {
            semigroupoid: semigroupoid_doc(&self.semigroupoid),
            action: action_doc(&self.action),
            bundle: bundle_doc(&self.bundle),
            kernel: self.kernel.as_ref().map(kernel_doc),
        }
    }

    /// SHA-256 of the canonical JSON serialisation.
    pub fn digest(&self) -> String {
        Self::doc_digest(&self.to_doc())
    }

    pub fn doc_digest(doc: &InstanceDoc) -> String {
        let bytes = serde_json::to_vec(doc).expect("documents serialise");
        hex::encode(Sha256::digest(bytes))
    }
}

fn parse<T: DeserializeOwned>(file: &str, text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        file: file.into(),
        line: e.line(),
        column: e.column(),
        msg: e.to_string(),
    })
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn cross(file: &str, msg: impl Into<String>) -> Error {
    Error::CrossRef {
        file: file.into(),
        msg: msg.into(),
    }
}

pub fn parse_instance(text: &str, file: &str) -> Result<InstanceDoc> {
    parse(file, text)
}

/// Reads a directory or a combined instance file.
pub fn read_instance_doc(path: &Path) -> Result<InstanceDoc> {
    if !path.is_dir() {
        let name = path.display().to_string();
        return parse(&name, &read(path)?);
    }
    let kernel_path = path.join(KERNEL_FILE);
    Ok(InstanceDoc {
        semigroupoid: parse(SEMIGROUPOID_FILE, &read(&path.join(SEMIGROUPOID_FILE))?)?,
        action: parse(ACTION_FILE, &read(&path.join(ACTION_FILE))?)?,
        bundle: parse(BUNDLE_FILE, &read(&path.join(BUNDLE_FILE))?)?,
        kernel: if kernel_path.exists() {
            Some(parse(KERNEL_FILE, &read(&kernel_path)?)?)
        } else {
            None
        },
    })
}

pub fn load(path: &Path) -> Result<Instance> {
    build_instance(&read_instance_doc(path)?)
}

/// Cross-references, semigroupoid axioms, action axioms and block shapes.
pub fn build_instance(doc: &InstanceDoc) -> Result<Instance> {
    let semigroupoid = Arc::new(build_semigroupoid(&doc.semigroupoid)?);
    let bundle = Arc::new(build_bundle(&doc.bundle)?);
    let action = Arc::new(build_action(&semigroupoid, &doc.action, &bundle)?);
    let kernel = doc
        .kernel
        .as_ref()
        .map(|k| build_kernel(k, &bundle))
        .transpose()?;
    Ok(Instance {
        semigroupoid,
        action,
        bundle,
        kernel,
    })
}

pub fn build_semigroupoid(doc: &SemigroupoidDoc) -> Result<StarSemigroupoid> {
    let sg = build_semigroupoid_unchecked(doc)?;
    if let Some(v) = sg.validate().violations.into_iter().next() {
        return Err(Error::Axiom {
            axiom: v.axiom,
            detail: format!("{} (witness {})", v.detail, v.witness.join(", ")),
        });
    }
    Ok(sg)
}

/// Resolves labels without checking the axioms.
pub fn build_semigroupoid_unchecked(doc: &SemigroupoidDoc) -> Result<StarSemigroupoid> {
    let tables = SemigroupoidTables {
        symbols: doc.symbols.clone(),
        elements: doc
            .elements
            .iter()
            .map(|e| (e.id.clone(), e.d.clone(), e.c.clone()))
            .collect(),
        compose: doc
            .compose
            .iter()
            .map(|[a, b, ab]| (a.clone(), b.clone(), ab.clone()))
            .collect(),
        star: doc
            .star
            .iter()
            .map(|[a, s]| (a.clone(), s.clone()))
            .collect(),
        units: doc
            .units
            .as_ref()
            .map(|u| u.iter().map(|(s, e)| (s.clone(), e.clone())).collect()),
    };
    StarSemigroupoid::from_tables(&tables).map_err(|e| match e {
        Error::MalformedTable(msg) | Error::DuplicateLabel(msg) => cross(SEMIGROUPOID_FILE, msg),
        other => other,
    })
}

pub fn build_bundle(doc: &BundleDoc) -> Result<HilbertBundle> {
    HilbertBundle::new(doc.dims.iter().map(|(x, n)| (x.clone(), *n))).map_err(|e| match e {
        Error::ZeroDim(x) => cross(BUNDLE_FILE, format!("point `{x}` has dimension 0")),
        other => other,
    })
}

/// The anchor is reordered to follow the bundle's point order.
pub fn build_action(
    sg: &Arc<StarSemigroupoid>,
    doc: &ActionDoc,
    bundle: &HilbertBundle,
) -> Result<LeftAction> {
    let act = build_action_unchecked(sg, doc, bundle)?;
    if let Some(v) = act.validate_action(false).violations.into_iter().next() {
        return Err(Error::Axiom {
            axiom: v.axiom,
            detail: format!("{} (witness {})", v.detail, v.witness.join(", ")),
        });
    }
    Ok(act)
}

/// Resolves labels and point order without checking the action axioms.
pub fn build_action_unchecked(
    sg: &Arc<StarSemigroupoid>,
    doc: &ActionDoc,
    bundle: &HilbertBundle,
) -> Result<LeftAction> {
    let in_bundle: BTreeSet<&str> = bundle.labels().iter().map(String::as_str).collect();
    let in_anchor: BTreeSet<&str> = doc.anchor.keys().map(String::as_str).collect();
    if let Some(x) = in_anchor.difference(&in_bundle).next() {
        return Err(cross(
            BUNDLE_FILE,
            format!("point `{x}` is anchored but has no dimension"),
        ));
    }
    if let Some(x) = in_bundle.difference(&in_anchor).next() {
        return Err(cross(
            ACTION_FILE,
            format!("point `{x}` has a dimension but no anchor"),
        ));
    }
    let tables = ActionTables {
        anchor: bundle
            .labels()
            .iter()
            .map(|x| (x.clone(), doc.anchor[x].clone()))
            .collect(),
        act: doc
            .act
            .iter()
            .map(|[a, x, y]| (a.clone(), x.clone(), y.clone()))
            .collect(),
    };
    LeftAction::from_tables(Arc::clone(sg), &tables).map_err(|e| match e {
        Error::MalformedTable(msg) => cross(ACTION_FILE, msg),
        other => other,
    })
}

fn matrix(file: &str, e: &EntryDoc, shape: (usize, usize)) -> Result<CMatrix> {
    let bad = |what: &str, got: (usize, usize)| {
        cross(
            file,
            format!(
                "block ({}, {}) {what} is {}×{}, expected {}×{}",
                e.row, e.col, got.0, got.1, shape.0, shape.1
            ),
        )
    };
    let dims = |m: &[Vec<f64>]| -> Option<(usize, usize)> {
        let cols = m.first().map_or(0, Vec::len);
        m.iter().all(|r| r.len() == cols).then_some((m.len(), cols))
    };
    let re_shape =
        dims(&e.re).ok_or_else(|| bad("real part has ragged rows and", (e.re.len(), 0)))?;
    if re_shape != shape {
        return Err(bad("real part", re_shape));
    }
    if let Some(im) = &e.im {
        let im_shape =
            dims(im).ok_or_else(|| bad("imaginary part has ragged rows and", (im.len(), 0)))?;
        if im_shape != shape {
            return Err(bad("imaginary part", im_shape));
        }
    }
    Ok(CMatrix::from_fn(shape.0, shape.1, |i, j| {
        C64::new(e.re[i][j], e.im.as_ref().map_or(0.0, |im| im[i][j]))
    }))
}

pub fn build_kernel(doc: &KernelDoc, bundle: &Arc<HilbertBundle>) -> Result<OpKernel> {
    build_kernel_in(doc, bundle, KERNEL_FILE)
}

pub fn build_kernel_in(
    doc: &KernelDoc,
    bundle: &Arc<HilbertBundle>,
    file: &str,
) -> Result<OpKernel> {
    let real = match doc.field.as_str() {
        "complex" => false,
        "real" => true,
        other => return Err(cross(file, format!("unknown field `{other}`"))),
    };
    let mut k = OpKernel::zero(bundle);
    let mut seen = BTreeSet::new();
    for e in &doc.entries {
        let pt = |l: &str| {
            bundle.point(l).ok_or_else(|| {
                cross(
                    file,
                    format!("block ({}, {}) names unknown point `{l}`", e.row, e.col),
                )
            })
        };
        let (x, y) = (pt(&e.row)?, pt(&e.col)?);
        if !seen.insert((x, y)) {
            return Err(cross(
                file,
                format!("block ({}, {}) given twice", e.row, e.col),
            ));
        }
        if real && e.im.is_some() {
            return Err(cross(
                file,
                format!(
                    "block ({}, {}) has an imaginary part in a real kernel",
                    e.row, e.col
                ),
            ));
        }
        let m = matrix(file, e, (bundle.dim(x), bundle.dim(y)))?;
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(cross(
                file,
                format!("block ({}, {}) has non-finite entries", e.row, e.col),
            ));
        }
        k.insert(x, y, m)?;
    }
    Ok(k)
}

pub fn load_kernel(path: &Path, bundle: &Arc<HilbertBundle>) -> Result<OpKernel> {
    let name = path.display().to_string();
    let doc: KernelDoc = parse(&name, &read(path)?)?;
    build_kernel_in(&doc, bundle, &name)
}

pub fn semigroupoid_doc(sg: &StarSemigroupoid) -> SemigroupoidDoc {
    let t = sg.to_tables();
    SemigroupoidDoc {
        symbols: t.symbols,
        elements: t
            .elements
            .into_iter()
            .map(|(id, d, c)| ElementDoc { id, d, c })
            .collect(),
        compose: t.compose.into_iter().map(|(a, b, ab)| [a, b, ab]).collect(),
        star: t.star.into_iter().map(|(a, s)| [a, s]).collect(),
        units: t.units.map(|u| u.into_iter().collect()),
    }
}

pub fn action_doc(act: &LeftAction) -> ActionDoc {
    let t = act.to_tables();
    ActionDoc {
        anchor: t.anchor.into_iter().collect(),
        act: t.act.into_iter().map(|(a, x, y)| [a, x, y]).collect(),
    }
}

pub fn bundle_doc(b: &HilbertBundle) -> BundleDoc {
    BundleDoc {
        dims: b
            .points()
            .map(|x| (b.label(x).to_string(), b.dim(x)))
            .collect(),
    }
}

pub fn kernel_doc(k: &OpKernel) -> KernelDoc {
    let b = k.bundle();
    let rows = |m: &CMatrix, f: fn(&C64) -> f64| -> Vec<Vec<f64>> {
        (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect())
            .collect()
    };
    KernelDoc {
        field: "complex".into(),
        entries: k
            .stored()
            .map(|(x, y, m)| EntryDoc {
                row: b.label(x).into(),
                col: b.label(y).into(),
                re: rows(m, |z| z.re),
                im: m.iter().any(|z| z.im != 0.0).then(|| rows(m, |z| z.im)),
            })
            .collect(),
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("documents serialise");
    s.push('\n');
    s
}

/// Writes the four documents into `dir`, creating it if needed.
pub fn save_instance(inst: &Instance, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let doc = inst.to_doc();
    write(&dir.join(SEMIGROUPOID_FILE), &to_json(&doc.semigroupoid))?;
    write(&dir.join(ACTION_FILE), &to_json(&doc.action))?;
    write(&dir.join(BUNDLE_FILE), &to_json(&doc.bundle))?;
    if let Some(k) = &doc.kernel {
        write(&dir.join(KERNEL_FILE), &to_json(k))?;
    }
    Ok(())
}

pub fn save_kernel(k: &OpKernel, path: &Path) -> Result<()> {
    write(path, &to_json(&kernel_doc(k)))
}

/// Pretty JSON with a trailing newline; identical values give identical
/// bytes.
pub fn save_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    write(path, &to_json(value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numlin::from_real_rows;
    use crate::sgpd::families::{self, GroupTable};

    fn z2_doc() -> InstanceDoc {
        let text = r#"{
          "semigroupoid": {
            "symbols": ["s"],
            "elements": [{"id": "e", "d": "s", "c": "s"}, {"id": "g", "d": "s", "c": "s"}],
            "compose": [["e","e","e"], ["e","g","g"], ["g","e","g"], ["g","g","e"]],
            "star": [["e","e"], ["g","g"]],
            "units": {"s": "e"}
          },
          "action": {
            "anchor": {"x1": "s", "x2": "s"},
            "act": [["e","x1","x1"], ["e","x2","x2"], ["g","x1","x2"], ["g","x2","x1"]]
          },
          "bundle": {"dims": {"x1": 1, "x2": 1}},
          "kernel": {"field": "complex", "entries": [
            {"row": "x1", "col": "x1", "re": [[2.0]]},
            {"row": "x1", "col": "x2", "re": [[1.0]], "im": [[0.0]]},
            {"row": "x2", "col": "x1", "re": [[1.0]]},
            {"row": "x2", "col": "x2", "re": [[2.0]]}
          ]}
        }"#;
        parse_instance(text, "z2.json").unwrap()
    }

    #[test]
    fn loads_z2() {
        let inst = build_instance(&z2_doc()).unwrap();
        assert_eq!(inst.semigroupoid.len(), 2);
        let k = inst.kernel.as_ref().unwrap();
        let x1 = inst.bundle.point("x1").unwrap();
        let x2 = inst.bundle.point("x2").unwrap();
        assert_eq!(k.block(x1, x2), from_real_rows(&[&[1.0]]));
        assert!(inst.frame().is_ok());
    }

    #[test]
    fn wrong_block_shape_names_pair() {
        let mut doc = z2_doc();
        doc.kernel.as_mut().unwrap().entries[1].re = vec![vec![1.0, 0.0]];
        match build_instance(&doc) {
            Err(Error::CrossRef { msg, .. }) => assert!(msg.contains("(x1, x2)"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_compose_element() {
        let mut doc = z2_doc();
        doc.semigroupoid.compose[0][2] = "h".into();
        assert!(matches!(build_instance(&doc), Err(Error::CrossRef { .. })));
    }

    #[test]
    fn axiom_failure_has_witness() {
        let mut doc = z2_doc();
        doc.semigroupoid.compose[3][2] = "g".into();
        match build_instance(&doc) {
            Err(Error::Axiom { detail, .. }) => assert!(detail.contains("witness")),
            other => panic!("{other:?}"),
        }
        let mut doc = z2_doc();
        doc.action.act[2][2] = "x1".into();
        assert!(matches!(build_instance(&doc), Err(Error::Axiom { .. })));
    }

    #[test]
    fn parse_error_has_position() {
        match parse_instance("{\n  \"semigroupoid\": [}", "bad.json") {
            Err(Error::Parse { line, column, .. }) => assert!(line == 2 && column > 0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_dimension_is_cross_ref() {
        let mut doc = z2_doc();
        doc.bundle.dims.shift_remove("x2");
        assert!(matches!(build_instance(&doc), Err(Error::CrossRef { .. })));
    }

    #[test]
    fn bundle_order_drives_points() {
        let mut doc = z2_doc();
        doc.bundle.dims = [("x2".to_string(), 1), ("x1".to_string(), 1)]
            .into_iter()
            .collect();
        let inst = build_instance(&doc).unwrap();
        assert_eq!(inst.action.labels(), ["x2", "x1"]);
    }

    #[test]
    fn round_trip_directory() {
        let inst = build_instance(&z2_doc()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        save_instance(&inst, dir.path()).unwrap();
        let back = load(dir.path()).unwrap();
        assert_eq!(back, inst);
        assert_eq!(back.digest(), inst.digest());
        let again = dir.path().join("again");
        save_instance(&back, &again).unwrap();
        for f in [SEMIGROUPOID_FILE, ACTION_FILE, BUNDLE_FILE, KERNEL_FILE] {
            assert_eq!(
                fs::read(dir.path().join(f)).unwrap(),
                fs::read(again.join(f)).unwrap()
            );
        }
    }

    #[test]
    fn round_trip_generated_family() {
        let (sg, act) = families::group_action(
            &GroupTable::dihedral(3),
            &["a", "b", "c"],
            &[
                vec![0, 1, 2],
                vec![1, 2, 0],
                vec![2, 0, 1],
                vec![0, 2, 1],
                vec![1, 0, 2],
                vec![2, 1, 0],
            ],
            5,
        )
        .unwrap();
        let bundle = Arc::new(HilbertBundle::new([("a", 2), ("b", 2), ("c", 2)]).unwrap());
        let inst = Instance {
            semigroupoid: sg,
            action: Arc::new(act),
            bundle,
            kernel: None,
        };
        let combined = to_json(&inst.to_doc());
        let back = build_instance(&parse_instance(&combined, "combined").unwrap()).unwrap();
        assert_eq!(back, inst);
    }
}
