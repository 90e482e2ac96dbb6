//! JSON wire formats. Every rational is a string `"p/q"` (or `"p"` for
//! integers) so values survive any JSON parser unchanged.
//!
//! Parsing happens in two stages: serde checks the shape, then conversion to
//! library types checks the numbers and invariants. Errors from the second
//! stage name the offending field by its path, e.g. `space.vertices[2][0]`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::arith::{format_rat, parse_rat, QMat, QVec, Rat};
use crate::error::{Error, Result};
use crate::extension::{Condition3Report, EventualCore, ExtensionCertificate};
use crate::partiso::{IsometrySystem, PartialIsometry};
use crate::polytope::{SymHRep, SymVRep};
use crate::shiftspace::FinSupportSeq;
use crate::space::{LinearMap, PolySpace, Subspace};

pub type WireVec = Vec<String>;

fn field_err(path: &str, e: Error) -> Error {
    Error::Parse(format!("{path}: {}", e.to_string().trim_start_matches("parse error: ")))
}

pub fn vec_to_wire(v: &[Rat]) -> WireVec {
    v.iter().map(format_rat).collect()
}

pub fn vec_from_wire(path: &str, v: &[String]) -> Result<QVec> {
    v.iter().enumerate().map(|(i, s)| parse_rat(s).map_err(|e| field_err(&format!("{path}[{i}]"), e))).collect()
}

fn vecs_to_wire(vs: &[QVec]) -> Vec<WireVec> {
    vs.iter().map(|v| vec_to_wire(v)).collect()
}

fn vecs_from_wire(path: &str, vs: &[WireVec], dim: usize) -> Result<Vec<QVec>> {
    vs.iter()
        .enumerate()
        .map(|(i, v)| {
            let p = format!("{path}[{i}]");
            let out = vec_from_wire(&p, v)?;
            if out.len() != dim {
                return Err(Error::Parse(format!("{p}: expected {dim} entries, found {}", out.len())));
            }
            Ok(out)
        })
        .collect()
}

fn rat_from_wire(path: &str, s: &str) -> Result<Rat> {
    parse_rat(s).map_err(|e| field_err(path, e))
}

fn expect_kind(path: &str, found: &Option<String>, kind: &str) -> Result<()> {
    match found {
        Some(k) if k != kind => Err(Error::Parse(format!("{path}kind: expected {kind:?}, found {k:?}"))),
        _ => Ok(()),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceWire {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<WireVec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub facets: Option<Vec<WireVec>>,
}

impl SpaceWire {
    pub fn from_space(s: &PolySpace) -> Self {
        SpaceWire {
            kind: Some("space".into()),
            dim: s.dim(),
            vertices: Some(vecs_to_wire(s.vertices())),
            facets: s.has_facets().then(|| vecs_to_wire(s.facets())),
        }
    }

    pub fn to_space(&self, path: &str) -> Result<PolySpace> {
        expect_kind(path, &self.kind, "space")?;
        let at = |field: &str| format!("{path}{field}");
        match (&self.vertices, &self.facets) {
            (Some(v), facets) => {
                let gens = vecs_from_wire(&at("vertices"), v, self.dim)?;
                let space = SymVRep::new(self.dim, gens)
                    .map(PolySpace::from_vrep)
                    .map_err(|e| field_err(&at("vertices"), e))?;
                if let Some(f) = facets {
                    let given = vecs_from_wire(&at("facets"), f, self.dim)?;
                    let given = SymHRep::new(self.dim, given).map_err(|e| field_err(&at("facets"), e))?;
                    if given.functionals() != space.facets() {
                        return Err(Error::Parse(format!("{}: inconsistent with the vertices", at("facets"))));
                    }
                }
                Ok(space)
            }
            (None, Some(f)) => {
                let fs = vecs_from_wire(&at("facets"), f, self.dim)?;
                PolySpace::from_facets(self.dim, fs).map_err(|e| field_err(&at("facets"), e))
            }
            (None, None) => Err(Error::Parse(format!("{}: one of vertices or facets is required", at("vertices")))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapWire {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<WireVec>,
}

impl MapWire {
    pub fn from_map(m: &LinearMap) -> Self {
        Self::from_matrix(m.matrix())
    }

    pub fn from_matrix(m: &QMat) -> Self {
        MapWire { rows: m.rows(), cols: m.cols(), entries: vecs_to_wire(&m.row_vecs()) }
    }

    pub fn to_matrix(&self, path: &str) -> Result<QMat> {
        let p = format!("{path}entries");
        if self.entries.len() != self.rows {
            return Err(Error::Parse(format!("{p}: expected {} rows, found {}", self.rows, self.entries.len())));
        }
        let rows = vecs_from_wire(&p, &self.entries, self.cols)?;
        QMat::from_rows(self.cols, &rows)
    }

    pub fn to_map(&self, path: &str) -> Result<LinearMap> {
        self.to_matrix(path).map(LinearMap::new)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubspaceWire {
    pub ambient_dim: usize,
    pub basis: Vec<WireVec>,
}

impl SubspaceWire {
    pub fn from_subspace(s: &Subspace) -> Self {
        SubspaceWire { ambient_dim: s.ambient_dim(), basis: vecs_to_wire(s.basis()) }
    }

    pub fn to_subspace(&self, path: &str) -> Result<Subspace> {
        let p = format!("{path}basis");
        let basis = vecs_from_wire(&p, &self.basis, self.ambient_dim)?;
        Subspace::new(self.ambient_dim, basis).map_err(|e| field_err(&p, e))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartIsoWire {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    pub space: SpaceWire,
    pub domain_basis: Vec<WireVec>,
    pub range_basis: Vec<WireVec>,
    /// Rows of the square matrix taking domain-basis to range-basis
    /// coordinates.
    pub map: Vec<WireVec>,
}

impl PartIsoWire {
    pub fn from_partiso(o: &PartialIsometry) -> Self {
        PartIsoWire {
            kind: Some("partiso".into()),
            space: SpaceWire::from_space(o.space()),
            domain_basis: vecs_to_wire(o.dom().basis()),
            range_basis: vecs_to_wire(o.ran().basis()),
            map: vecs_to_wire(&o.map().row_vecs()),
        }
    }

    /// Parses without checking the isometry invariants.
    pub fn to_unchecked(&self, path: &str) -> Result<PartialIsometry> {
        expect_kind(path, &self.kind, "partiso")?;
        let space = self.space.to_space(&format!("{path}space."))?;
        let d = space.dim();
        let basis = |field: &str, vs: &[WireVec]| -> Result<Subspace> {
            let p = format!("{path}{field}");
            let vs = vecs_from_wire(&p, vs, d)?;
            Subspace::new(d, vs).map_err(|e| field_err(&p, e))
        };
        let dom = basis("domain_basis", &self.domain_basis)?;
        let ran = basis("range_basis", &self.range_basis)?;
        let p = format!("{path}map");
        let rows = vecs_from_wire(&p, &self.map, dom.dim())?;
        let map = QMat::from_rows(dom.dim(), &rows).map_err(|e| field_err(&p, e))?;
        Ok(PartialIsometry::new_unchecked(space, dom, ran, map))
    }

    pub fn to_partiso(&self, path: &str) -> Result<PartialIsometry> {
        let o = self.to_unchecked(path)?;
        match crate::partiso::validate(&o).violation {
            None => Ok(o),
            Some(v) => Err(Error::Parse(format!("{path}map: {v}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceWire {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    pub space: SpaceWire,
    pub entries: BTreeMap<String, WireVec>,
}

impl SequenceWire {
    pub fn from_sequence(a: &FinSupportSeq) -> Self {
        SequenceWire {
            kind: Some("sequence".into()),
            space: SpaceWire::from_space(a.space()),
            entries: a.entries().iter().map(|(k, v)| (k.to_string(), vec_to_wire(v))).collect(),
        }
    }

    pub fn to_sequence(&self, path: &str) -> Result<FinSupportSeq> {
        expect_kind(path, &self.kind, "sequence")?;
        let space = self.space.to_space(&format!("{path}space."))?;
        let d = space.dim();
        let mut seq = FinSupportSeq::new(space);
        for (k, v) in &self.entries {
            let p = format!("{path}entries.{k}");
            let index: i64 = k.parse().map_err(|_| Error::Parse(format!("{p}: index is not an integer")))?;
            let value = vecs_from_wire(&p, std::slice::from_ref(v), d)?.remove(0);
            seq.set(index, value)?;
        }
        Ok(seq)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemWire {
    pub space: SpaceWire,
    pub auto: MapWire,
    pub embed: MapWire,
    pub order: usize,
}

impl SystemWire {
    pub fn from_system(s: &IsometrySystem) -> Self {
        SystemWire {
            space: SpaceWire::from_space(&s.space),
            auto: MapWire::from_map(&s.auto),
            embed: MapWire::from_map(&s.embed),
            order: s.order,
        }
    }

    pub fn to_system(&self, path: &str) -> Result<IsometrySystem> {
        Ok(IsometrySystem {
            space: self.space.to_space(&format!("{path}space."))?,
            auto: self.auto.to_map(&format!("{path}auto."))?,
            embed: self.embed.to_map(&format!("{path}embed."))?,
            order: self.order,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportWire {
    pub n: usize,
    pub holds: bool,
    #[serde(default)]
    pub witness: Option<Vec<WireVec>>,
    #[serde(default)]
    pub lhs: Option<String>,
    #[serde(default)]
    pub rhs: Option<String>,
}

impl ReportWire {
    pub fn from_report(r: &Condition3Report) -> Self {
        ReportWire {
            n: r.n,
            holds: r.holds,
            witness: r.witness.as_ref().map(|w| vecs_to_wire(w)),
            lhs: r.lhs.as_ref().map(format_rat),
            rhs: r.rhs.as_ref().map(format_rat),
        }
    }

    pub fn to_report(&self, path: &str, dom_dim: usize) -> Result<Condition3Report> {
        Ok(Condition3Report {
            n: self.n,
            holds: self.holds,
            witness: match &self.witness {
                Some(w) => Some(vecs_from_wire(&format!("{path}witness"), w, dom_dim)?),
                None => None,
            },
            lhs: self.lhs.as_deref().map(|s| rat_from_wire(&format!("{path}lhs"), s)).transpose()?,
            rhs: self.rhs.as_deref().map(|s| rat_from_wire(&format!("{path}rhs"), s)).transpose()?,
        })
    }
}

/// Every certificate kind the `verify` command understands.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CertificateWire {
    /// `partiso` extends into `system` with `auto^n = id`.
    Extension { partiso: PartIsoWire, n: usize, system: SystemWire },
    /// The cycle inequality fails at `report.n`.
    Violation { partiso: PartIsoWire, report: ReportWire },
    /// Failing reports for every `n` in `1..=n_max`.
    Unknown { partiso: PartIsoWire, n_max: usize, reports: Vec<ReportWire> },
}

/// Decoded form of [`CertificateWire`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Certificate {
    Extension(ExtensionCertificate),
    Violation { partiso: PartialIsometry, report: Condition3Report },
    Unknown { partiso: PartialIsometry, n_max: usize, reports: Vec<Condition3Report> },
}

impl Certificate {
    pub fn to_wire(&self) -> CertificateWire {
        match self {
            Certificate::Extension(c) => CertificateWire::Extension {
                partiso: PartIsoWire::from_partiso(&c.partiso),
                n: c.n,
                system: SystemWire::from_system(&c.system),
            },
            Certificate::Violation { partiso, report } => CertificateWire::Violation {
                partiso: PartIsoWire::from_partiso(partiso),
                report: ReportWire::from_report(report),
            },
            Certificate::Unknown { partiso, n_max, reports } => CertificateWire::Unknown {
                partiso: PartIsoWire::from_partiso(partiso),
                n_max: *n_max,
                reports: reports.iter().map(ReportWire::from_report).collect(),
            },
        }
    }

    /// Re-checks the certificate from its data alone.
    pub fn verify(&self) -> Result<bool> {
        match self {
            Certificate::Extension(c) => c.verify(),
            Certificate::Violation { partiso, report } => Ok(crate::partiso::validate(partiso).is_valid()
                && report.witness_is_sound(partiso)?),
            Certificate::Unknown { partiso, n_max, reports } => {
                if !crate::partiso::validate(partiso).is_valid() || reports.len() != *n_max {
                    return Ok(false);
                }
                for (i, r) in reports.iter().enumerate() {
                    if r.n != i + 1 || !r.witness_is_sound(partiso)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
        }
    }
}

impl CertificateWire {
    /// Decodes; the partial isometry inside is parsed but not validated, so
    /// that `verify` can reject it as unsound rather than as malformed.
    pub fn decode(&self) -> Result<Certificate> {
        Ok(match self {
            CertificateWire::Extension { partiso, n, system } => Certificate::Extension(ExtensionCertificate {
                partiso: partiso.to_unchecked("partiso.")?,
                n: *n,
                system: system.to_system("system.")?,
            }),
            CertificateWire::Violation { partiso, report } => {
                let partiso = partiso.to_unchecked("partiso.")?;
                let report = report.to_report("report.", partiso.dom().dim())?;
                Certificate::Violation { partiso, report }
            }
            CertificateWire::Unknown { partiso, n_max, reports } => {
                let partiso = partiso.to_unchecked("partiso.")?;
                let reports = reports
                    .iter()
                    .enumerate()
                    .map(|(i, r)| r.to_report(&format!("reports[{i}]."), partiso.dom().dim()))
                    .collect::<Result<_>>()?;
                Certificate::Unknown { partiso, n_max: *n_max, reports }
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoreWire {
    pub core: SubspaceWire,
    pub restricted: MapWire,
    pub steps: usize,
}

impl CoreWire {
    pub fn from_core(c: &EventualCore) -> Self {
        CoreWire {
            core: SubspaceWire::from_subspace(&c.core),
            restricted: MapWire::from_map(&c.restricted),
            steps: c.steps,
        }
    }
}

/// Deserializes JSON, reporting serde's line and column on failure.
pub fn from_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

/// Indented JSON with scalar-only arrays kept on one line, newline-terminated.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let value = serde_json::to_value(value).expect("wire types serialize");
    let mut out = String::new();
    write_value(&mut out, &value, 0);
    out.push('\n');
    out
}

fn write_value(out: &mut String, v: &serde_json::Value, depth: usize) {
    use serde_json::Value;
    let pad = |n: usize| "  ".repeat(n);
    match v {
        Value::Array(items) if items.iter().all(|x| !x.is_array() && !x.is_object()) => {
            out.push_str(&serde_json::to_string(v).expect("scalars serialize").replace(',', ", "));
        }
        Value::Array(items) => {
            out.push_str("[\n");
            for (i, x) in items.iter().enumerate() {
                out.push_str(&pad(depth + 1));
                write_value(out, x, depth + 1);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(depth));
            out.push(']');
        }
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Object(map) => {
            out.push_str("{\n");
            for (i, (k, x)) in map.iter().enumerate() {
                out.push_str(&pad(depth + 1));
                out.push_str(&serde_json::to_string(k).expect("keys serialize"));
                out.push_str(": ");
                write_value(out, x, depth + 1);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(depth));
            out.push('}');
        }
        scalar => out.push_str(&serde_json::to_string(scalar).expect("scalars serialize")),
    }
}

pub fn parse_space(text: &str) -> Result<PolySpace> {
    from_json::<SpaceWire>(text)?.to_space("")
}

pub fn print_space(s: &PolySpace) -> String {
    to_json(&SpaceWire::from_space(s))
}

pub fn parse_partiso(text: &str) -> Result<PartialIsometry> {
    from_json::<PartIsoWire>(text)?.to_partiso("")
}

pub fn print_partiso(o: &PartialIsometry) -> String {
    to_json(&PartIsoWire::from_partiso(o))
}

pub fn parse_certificate(text: &str) -> Result<Certificate> {
    from_json::<CertificateWire>(text)?.decode()
}

pub fn print_certificate(c: &Certificate) -> String {
    to_json(&c.to_wire())
}
