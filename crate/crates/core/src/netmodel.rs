//! Case files, inductive susceptance assembly, Kron reduction and impedance
//! scaling.
//!
//! The network is purely inductive: every branch and every Thévenin link is a
//! series reactance. The ground node is implicit, so a Thévenin link only
//! contributes to the diagonal of the susceptance matrix. Sign convention:
//! `B_ij = 1/x_ij` off the diagonal and `B_ii = -(Σ_j 1/x_ij + 1/x_th,i)`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};

use crate::converter::{ConverterError, LccParams};

/// Identifier of a bus as written in the case file.
pub type BusId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BusKind {
    Converter,
    Internal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bus {
    pub id: BusId,
    pub kind: BusKind,
}

/// Series reactance between two buses, pu on the system base.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Branch {
    pub from: BusId,
    pub to: BusId,
    pub x_pu: f64,
}

/// Thévenin source `emf_pu ∠ 0` behind `x_pu` at `bus`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TheveninLink {
    pub bus: BusId,
    pub x_pu: f64,
    #[serde(default = "unit_emf")]
    pub emf_pu: f64,
}

fn unit_emf() -> f64 {
    1.0
}

/// How the power flow obtains the Thévenin emfs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmfMode {
    /// Use `emf_pu` from every link as written.
    #[default]
    Fixed,
    /// Recompute the emfs so that the rated operating point (every converter
    /// at rated power) sits at 1 pu voltage on every converter bus.
    RatedVoltage,
}

/// Converter block of the case schema.
///
/// Per-unit quantities are on the converter's own base (`base_mva`, which
/// defaults to `p_dn_mw`) and the AC voltage base of the case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConverterSpec {
    pub bus: BusId,
    /// Rated inverter-side power in MW.
    pub p_dn_mw: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_mva: Option<f64>,
    /// Extinction angle. Defaults to 18° at 50 Hz and 15° at 60 Hz.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_deg: Option<f64>,
    pub n_bridges: u32,
    pub k_ratio: f64,
    pub x_commutation_pu: f64,
    #[serde(default)]
    pub r_dc_pu: f64,
    #[serde(default)]
    pub b_c_pu: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_pu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub control: Option<String>,
}

impl ConverterSpec {
    pub fn own_base_mva(&self) -> f64 {
        self.base_mva.unwrap_or(self.p_dn_mw)
    }
}

/// Full system description.
///
/// Construct through [`load_case`] or [`CaseFile::from_json_str`], both of
/// which validate. Code that edits the public fields should call
/// [`CaseFile::validate`] afterwards.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub system_base_mva: f64,
    pub frequency_hz: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ac_base_kv: Option<f64>,
    #[serde(default)]
    pub emf_mode: EmfMode,
    pub buses: Vec<Bus>,
    pub branches: Vec<Branch>,
    pub thevenin_links: Vec<TheveninLink>,
    pub converters: Vec<ConverterSpec>,
}

#[derive(Debug, thiserror::Error)]
pub enum CaseError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{origin}: parse error at line {line}, column {column}: {message}")]
    Parse {
        origin: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid case: {0}")]
    Invalid(#[from] ValidationError),
    #[error("impedance scale must be positive and finite, got {0}")]
    InvalidScale(f64),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ValidationError {
    #[error("system_base_mva must be positive, got {0}")]
    BadSystemBase(f64),
    #[error("frequency_hz must be positive, got {0}")]
    BadFrequency(f64),
    #[error("case has no buses")]
    NoBuses,
    #[error("bus {0} declared more than once")]
    DuplicateBus(BusId),
    #[error("{element} references unknown bus {bus}")]
    UnknownBus { element: String, bus: BusId },
    #[error("branch {0}-{0} connects a bus to itself")]
    SelfLoop(BusId),
    #[error("{element} has nonpositive reactance {value}")]
    NonPositiveReactance { element: String, value: f64 },
    #[error("thevenin link at bus {bus} has nonpositive emf {value}")]
    NonPositiveEmf { bus: BusId, value: f64 },
    #[error("case needs at least one thevenin link")]
    NoTheveninLink,
    #[error("case has no converter bus")]
    NoConverter,
    #[error("bus {0} hosts more than one converter")]
    DuplicateConverter(BusId),
    #[error("converter bus {0} has no converter")]
    MissingConverter(BusId),
    #[error("converter placed on internal bus {0}")]
    ConverterOnInternalBus(BusId),
    #[error("converter at bus {bus}: control mode {mode:?} unsupported (only cp-cea)")]
    UnsupportedControl { bus: BusId, mode: String },
    #[error("converter at bus {bus}: {reason}")]
    InvalidConverter { bus: BusId, reason: String },
    #[error("network is disconnected from every thevenin source at buses {0:?}")]
    Disconnected(Vec<BusId>),
}

impl CaseFile {
    /// Parse and validate a case from JSON text.
    pub fn from_json_str(text: &str, origin: &str) -> Result<Self, CaseError> {
        let case: CaseFile = serde_json::from_str(text).map_err(|e| CaseError::Parse {
            origin: origin.to_string(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        case.validate()?;
        Ok(case)
    }

    pub fn to_json_string(&self) -> String {
        // Plain data; serialization cannot fail.
        serde_json::to_string_pretty(self).expect("case serialization")
    }

    pub fn validate(&self) -> Result<(), ValidationError> {
        if !(self.system_base_mva > 0.0 && self.system_base_mva.is_finite()) {
            return Err(ValidationError::BadSystemBase(self.system_base_mva));
        }
        if !(self.frequency_hz > 0.0 && self.frequency_hz.is_finite()) {
            return Err(ValidationError::BadFrequency(self.frequency_hz));
        }
        if self.buses.is_empty() {
            return Err(ValidationError::NoBuses);
        }
        let mut index = HashMap::new();
        for (i, bus) in self.buses.iter().enumerate() {
            if index.insert(bus.id, i).is_some() {
                return Err(ValidationError::DuplicateBus(bus.id));
            }
        }
        let known = |element: String, bus: BusId| {
            if index.contains_key(&bus) {
                Ok(())
            } else {
                Err(ValidationError::UnknownBus { element, bus })
            }
        };
        for br in &self.branches {
            let name = format!("branch {}-{}", br.from, br.to);
            known(name.clone(), br.from)?;
            known(name.clone(), br.to)?;
            if br.from == br.to {
                return Err(ValidationError::SelfLoop(br.from));
            }
            check_reactance(name, br.x_pu)?;
        }
        if self.thevenin_links.is_empty() {
            return Err(ValidationError::NoTheveninLink);
        }
        for link in &self.thevenin_links {
            let name = format!("thevenin link at bus {}", link.bus);
            known(name.clone(), link.bus)?;
            check_reactance(name, link.x_pu)?;
            if !(link.emf_pu > 0.0 && link.emf_pu.is_finite()) {
                return Err(ValidationError::NonPositiveEmf {
                    bus: link.bus,
                    value: link.emf_pu,
                });
            }
        }

        let mut hosted = BTreeSet::new();
        for conv in &self.converters {
            known(format!("converter at bus {}", conv.bus), conv.bus)?;
            if self.buses[index[&conv.bus]].kind != BusKind::Converter {
                return Err(ValidationError::ConverterOnInternalBus(conv.bus));
            }
            if !hosted.insert(conv.bus) {
                return Err(ValidationError::DuplicateConverter(conv.bus));
            }
            if let Some(mode) = &conv.control {
                let norm = mode.to_ascii_lowercase().replace('_', "-");
                if norm != "cp-cea" {
                    return Err(ValidationError::UnsupportedControl {
                        bus: conv.bus,
                        mode: mode.clone(),
                    });
                }
            }
            self.lcc_params_of(conv)
                .and_then(|p| p.validate())
                .map_err(|e| ValidationError::InvalidConverter {
                    bus: conv.bus,
                    reason: e.to_string(),
                })?;
        }
        let conv_buses = self.converter_buses();
        if conv_buses.is_empty() {
            return Err(ValidationError::NoConverter);
        }
        if let Some(missing) = conv_buses.iter().find(|b| !hosted.contains(b)) {
            return Err(ValidationError::MissingConverter(*missing));
        }

        // Ground is node `n`.
        let n = self.buses.len();
        let mut uf = UnionFind::<usize>::new(n + 1);
        for br in &self.branches {
            uf.union(index[&br.from], index[&br.to]);
        }
        for link in &self.thevenin_links {
            uf.union(index[&link.bus], n);
        }
        let floating: Vec<BusId> = self
            .buses
            .iter()
            .enumerate()
            .filter(|(i, _)| !uf.equiv(*i, n))
            .map(|(_, b)| b.id)
            .collect();
        if !floating.is_empty() {
            return Err(ValidationError::Disconnected(floating));
        }
        Ok(())
    }

    /// Converter buses in file order; this is the row order of every reduced
    /// quantity.
    pub fn converter_buses(&self) -> Vec<BusId> {
        self.buses
            .iter()
            .filter(|b| b.kind == BusKind::Converter)
            .map(|b| b.id)
            .collect()
    }

    pub fn converter_at(&self, bus: BusId) -> Option<&ConverterSpec> {
        self.converters.iter().find(|c| c.bus == bus)
    }

    /// Converter constants on the system base, ordered like
    /// [`converter_buses`](Self::converter_buses).
    pub fn lcc_params(&self) -> Result<Vec<LccParams>, ConverterError> {
        self.converter_buses()
            .into_iter()
            .map(|bus| {
                let spec = self
                    .converter_at(bus)
                    .ok_or(ConverterError::MissingConverter(bus))?;
                self.lcc_params_of(spec)
            })
            .collect()
    }

    fn lcc_params_of(&self, spec: &ConverterSpec) -> Result<LccParams, ConverterError> {
        let gamma_deg = match spec.gamma_deg {
            Some(g) => g,
            None => default_gamma_deg(self.frequency_hz)
                .ok_or(ConverterError::NoDefaultGamma(self.frequency_hz))?,
        };
        let own = spec.own_base_mva();
        if !(own > 0.0 && own.is_finite()) {
            return Err(ConverterError::InvalidParams(format!(
                "converter base {own} MVA must be positive"
            )));
        }
        let ratio = self.system_base_mva / own;
        Ok(LccParams {
            p_dn: spec.p_dn_mw / self.system_base_mva,
            gamma: gamma_deg.to_radians(),
            n_bridges: spec.n_bridges,
            k_ratio: spec.k_ratio,
            x_c: spec.x_commutation_pu * ratio,
            r_dc: spec.r_dc_pu * ratio,
            b_c: spec.b_c_pu / ratio,
            omega: spec.omega_pu.unwrap_or(1.0),
        })
    }

    /// Rated powers `P_Ni` in system-base pu, converter-bus order.
    pub fn rated_powers(&self) -> DVector<f64> {
        let buses = self.converter_buses();
        DVector::from_iterator(
            buses.len(),
            buses.iter().map(|b| {
                self.converter_at(*b).map_or(f64::NAN, |c| c.p_dn_mw) / self.system_base_mva
            }),
        )
    }

    /// AC base impedance `kV² / MVA` in ohms, when the case declares a kV base.
    pub fn base_impedance_ohm(&self) -> Option<f64> {
        self.ac_base_kv.map(|kv| kv * kv / self.system_base_mva)
    }

    pub fn label(&self) -> &str {
        self.name.as_deref().unwrap_or("case")
    }
}

/// Extinction-angle convention: 18° for 50 Hz systems, 15° for 60 Hz.
pub fn default_gamma_deg(frequency_hz: f64) -> Option<f64> {
    if (frequency_hz - 50.0).abs() < 1e-9 {
        Some(18.0)
    } else if (frequency_hz - 60.0).abs() < 1e-9 {
        Some(15.0)
    } else {
        None
    }
}

fn check_reactance(element: String, x: f64) -> Result<(), ValidationError> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(ValidationError::NonPositiveReactance { element, value: x })
    }
}

/// Read, parse and validate a case file.
pub fn load_case(path: impl AsRef<Path>) -> Result<CaseFile, CaseError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| CaseError::Io {
        path: path.display().to_string(),
        source,
    })?;
    CaseFile::from_json_str(&text, &path.display().to_string())
}

/// Dense nodal susceptance matrix (pu) with its bus labelling.
#[derive(Debug, Clone, PartialEq)]
pub struct SusceptanceMatrix {
    entries: DMatrix<f64>,
    buses: Vec<BusId>,
}

impl SusceptanceMatrix {
    /// Wrap a square matrix. Panics if the labelling does not match the order.
    pub fn new(entries: DMatrix<f64>, buses: Vec<BusId>) -> Self {
        assert!(entries.is_square(), "susceptance matrix must be square");
        assert_eq!(entries.nrows(), buses.len(), "one label per row");
        Self { entries, buses }
    }

    pub fn order(&self) -> usize {
        self.buses.len()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn buses(&self) -> &[BusId] {
        &self.buses
    }

    pub fn bus_index(&self, bus: BusId) -> Option<usize> {
        self.buses.iter().position(|b| *b == bus)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            entries: &self.entries * factor,
            buses: self.buses.clone(),
        }
    }
}

impl fmt::Display for SusceptanceMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "buses {:?}{}", self.buses, self.entries)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NetworkError {
    #[error("bus {0} is not part of the matrix")]
    UnknownBus(BusId),
    #[error("eliminated buses {0:?} form a floating subnetwork (singular internal block)")]
    FloatingSubnetwork(Vec<BusId>),
    #[error("internal block is numerically singular")]
    SingularInternalBlock,
    #[error("thevenin source coupling is not invertible; rated-voltage emf calibration needs one source per converter bus")]
    UncalibratableSources,
}

/// Assemble the susceptance matrix over every bus of the case.
pub fn build_susceptance(case: &CaseFile) -> SusceptanceMatrix {
    let buses: Vec<BusId> = case.buses.iter().map(|b| b.id).collect();
    let index: HashMap<BusId, usize> = buses.iter().enumerate().map(|(i, b)| (*b, i)).collect();
    let n = buses.len();
    let mut b = DMatrix::zeros(n, n);
    for br in &case.branches {
        let (i, j) = (index[&br.from], index[&br.to]);
        let y = 1.0 / br.x_pu;
        b[(i, j)] += y;
        b[(j, i)] += y;
        b[(i, i)] -= y;
        b[(j, j)] -= y;
    }
    for link in &case.thevenin_links {
        let i = index[&link.bus];
        b[(i, i)] -= 1.0 / link.x_pu;
    }
    SusceptanceMatrix::new(b, buses)
}

/// Eliminate every bus not in `keep`: `B_kk - B_ke B_ee⁻¹ B_ek`.
///
/// The kept buses stay in the order they have in `b`.
pub fn kron_reduce(
    b: &SusceptanceMatrix,
    keep: &[BusId],
) -> Result<SusceptanceMatrix, NetworkError> {
    let (kept, elim) = partition(b, keep)?;
    if elim.is_empty() {
        let idx: Vec<usize> = kept.clone();
        let m = b.entries.select_rows(&idx).select_columns(&idx);
        return Ok(SusceptanceMatrix::new(
            m,
            kept.iter().map(|i| b.buses[*i]).collect(),
        ));
    }
    check_floating(b, &kept, &elim)?;
    let full = &b.entries;
    let bkk = full.select_rows(&kept).select_columns(&kept);
    let bke = full.select_rows(&kept).select_columns(&elim);
    let bee = full.select_rows(&elim).select_columns(&elim);
    let bek = full.select_rows(&elim).select_columns(&kept);
    let x = bee
        .lu()
        .solve(&bek)
        .ok_or(NetworkError::SingularInternalBlock)?;
    let red = bkk - bke * x;
    let red = (&red + red.transpose()) * 0.5;
    Ok(SusceptanceMatrix::new(
        red,
        kept.iter().map(|i| b.buses[*i]).collect(),
    ))
}

fn partition(
    b: &SusceptanceMatrix,
    keep: &[BusId],
) -> Result<(Vec<usize>, Vec<usize>), NetworkError> {
    let keep_set: BTreeSet<BusId> = keep.iter().copied().collect();
    for bus in &keep_set {
        if b.bus_index(*bus).is_none() {
            return Err(NetworkError::UnknownBus(*bus));
        }
    }
    let (kept, elim): (Vec<usize>, Vec<usize>) =
        (0..b.order()).partition(|i| keep_set.contains(&b.buses[*i]));
    Ok((kept, elim))
}

/// Groups of eliminated buses with no path to a kept bus or to ground make
/// `B_ee` singular; name them instead of failing inside the factorization.
fn check_floating(b: &SusceptanceMatrix, kept: &[usize], elim: &[usize]) -> Result<(), NetworkError> {
    let m = &b.entries;
    let pos: HashMap<usize, usize> = elim.iter().enumerate().map(|(k, i)| (*i, k)).collect();
    let mut uf = UnionFind::<usize>::new(elim.len());
    for (k, &i) in elim.iter().enumerate() {
        for &j in elim {
            if i != j && m[(i, j)] != 0.0 {
                uf.union(k, pos[&j]);
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (k, &i) in elim.iter().enumerate() {
        groups.entry(uf.find(k)).or_default().push(i);
    }
    for rows in groups.values() {
        let leaks = rows.iter().any(|&i| {
            let scale = m[(i, i)].abs().max(f64::MIN_POSITIVE);
            let row_sum: f64 = m.row(i).iter().sum();
            kept.iter().any(|&k| m[(i, k)] != 0.0) || row_sum.abs() > 1e-12 * scale
        });
        if !leaks {
            return Err(NetworkError::FloatingSubnetwork(
                rows.iter().map(|i| b.buses[*i]).collect(),
            ));
        }
    }
    Ok(())
}

/// Multiply every branch and Thévenin reactance by `s`.
pub fn scale_impedance(case: &CaseFile, s: f64) -> Result<CaseFile, CaseError> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(CaseError::InvalidScale(s));
    }
    let mut out = case.clone();
    for br in &mut out.branches {
        br.x_pu *= s;
    }
    for link in &mut out.thevenin_links {
        link.x_pu *= s;
    }
    Ok(out)
}

/// Network seen from the converter buses once internal buses are eliminated:
/// the reduced susceptance matrix plus the coupling of every converter bus to
/// every Thévenin source.
#[derive(Debug, Clone)]
pub struct ReducedNetwork {
    pub b: SusceptanceMatrix,
    /// `n_conv × n_sources`, positive entries.
    pub source_coupling: DMatrix<f64>,
    /// Source emfs, one per Thévenin link in file order.
    pub emf: DVector<f64>,
}

impl ReducedNetwork {
    pub fn from_case(case: &CaseFile) -> Result<Self, NetworkError> {
        let full = build_susceptance(case);
        let keep = case.converter_buses();
        let b = kron_reduce(&full, &keep)?;
        let (kept, elim) = partition(&full, &keep)?;
        let n_src = case.thevenin_links.len();
        let mut bs = DMatrix::zeros(full.order(), n_src);
        for (s, link) in case.thevenin_links.iter().enumerate() {
            let i = full.bus_index(link.bus).ok_or(NetworkError::UnknownBus(link.bus))?;
            bs[(i, s)] += 1.0 / link.x_pu;
        }
        let bks = bs.select_rows(&kept);
        let coupling = if elim.is_empty() {
            bks
        } else {
            let m = full.entries();
            let bke = m.select_rows(&kept).select_columns(&elim);
            let bee = m.select_rows(&elim).select_columns(&elim);
            let bes = bs.select_rows(&elim);
            let x = bee
                .lu()
                .solve(&bes)
                .ok_or(NetworkError::SingularInternalBlock)?;
            bks - bke * x
        };
        let emf = DVector::from_iterator(n_src, case.thevenin_links.iter().map(|l| l.emf_pu));
        Ok(Self {
            b,
            source_coupling: coupling,
            emf,
        })
    }

    pub fn order(&self) -> usize {
        self.b.order()
    }

    /// Equivalent emf admittance injection `g = C·E` per converter bus.
    pub fn emf_injection(&self) -> DVector<f64> {
        &self.source_coupling * &self.emf
    }

    /// Choose emfs that realise a target injection vector `g`.
    pub fn set_emf_injection(&mut self, g: &DVector<f64>) -> Result<(), NetworkError> {
        let c = &self.source_coupling;
        if !c.is_square() {
            return Err(NetworkError::UncalibratableSources);
        }
        let emf = c
            .clone()
            .lu()
            .solve(g)
            .ok_or(NetworkError::UncalibratableSources)?;
        self.emf = emf;
        Ok(())
    }
}
