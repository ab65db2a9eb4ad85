//! Region-level pipeline shared by the command line tool and the tests.

use std::sync::OnceLock;

use num_rational::BigRational;
use num_traits::One;
use serde_json::{json, Value};

use crate::algebra::LaurentPoly;
use crate::cert::Certification;
use crate::kasteleyn::{
    disk_det_certificate, flux_and_volume, phi_by_enumeration, phi_of, DetMethod, KasteleynError, Phi,
};
use crate::region::{Annulus, Classification, GridRegion};
use crate::spectral;
use crate::surface::{Surface, TrackSegment};
use crate::tiling::{
    apply_flip, check_flux_connectivity, detect_walls, enumerate_tilings, exactness_check, flip_graph, FlipGraph,
    Tiling, WallReport,
};
use crate::transfer::{connection_matrix, ConnectionMatrix, TransferError};

/// What a region is, as far as the pipeline is concerned.
#[derive(Debug, Clone)]
pub enum Kind {
    Disk,
    Annulus(Box<TrackSegment>),
    Other(String),
}

/// A parsed region with lazily computed tilings, flip graph, q-flux
/// polynomial and connection matrix.
pub struct Analysis {
    pub id: String,
    pub region: GridRegion,
    pub classification: Classification,
    pub kind: Kind,
    surface: Surface,
    tilings: OnceLock<Vec<Tiling>>,
    phi: OnceLock<Result<Phi, KasteleynError>>,
    graph: OnceLock<Result<FlipGraph, KasteleynError>>,
    cm: OnceLock<Result<ConnectionMatrix, TransferError>>,
}

impl Analysis {
    pub fn new(id: impl Into<String>, region: GridRegion) -> Analysis {
        let classification = region.classify();
        let kind = match &classification {
            Classification::Disk => Kind::Disk,
            Classification::Annulus { .. } => {
                Kind::Annulus(Box::new(TrackSegment::new(Annulus::new(region.clone()).expect("classified"))))
            }
            Classification::Other { reason } => Kind::Other(reason.clone()),
        };
        let surface = match &kind {
            Kind::Annulus(ts) => ts.surface.clone(),
            _ => Surface::planar(&region, None),
        };
        Analysis {
            id: id.into(),
            region,
            classification,
            kind,
            surface,
            tilings: OnceLock::new(),
            phi: OnceLock::new(),
            graph: OnceLock::new(),
            cm: OnceLock::new(),
        }
    }

    /// The surface used for weights: cut open along the cut for annuli.
    pub fn surface(&self) -> &Surface {
        &self.surface
    }

    pub fn segment(&self) -> Option<&TrackSegment> {
        match &self.kind {
            Kind::Annulus(ts) => Some(ts),
            _ => None,
        }
    }

    pub fn is_balanced(&self) -> bool {
        self.region.is_balanced()
    }

    pub fn tilings(&self) -> &[Tiling] {
        self.tilings.get_or_init(|| enumerate_tilings(&self.surface))
    }

    pub fn phi(&self) -> Result<&Phi, KasteleynError> {
        self.phi.get_or_init(|| phi_of(&self.surface, None)).as_ref().map_err(Clone::clone)
    }

    /// Positive-coefficient q-flux polynomial (zero when untileable).
    pub fn phi_normalized(&self) -> Result<LaurentPoly, KasteleynError> {
        let phi = self.phi()?;
        phi.normalized.clone().ok_or(KasteleynError::SignMixture)
    }

    pub fn flip_graph(&self) -> Result<&FlipGraph, KasteleynError> {
        self.graph
            .get_or_init(|| {
                let tilings = self.tilings().to_vec();
                let flux = flux_and_volume(&self.surface, &tilings)?.into_iter().map(|(f, _)| f).collect();
                Ok(flip_graph(&self.surface, tilings, flux))
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    pub fn walls(&self) -> Option<Result<WallReport, crate::tiling::TilingError>> {
        self.segment().map(|ts| detect_walls(&ts.annulus, self.tilings()))
    }

    pub fn connection_matrix(&self) -> Option<Result<&ConnectionMatrix, TransferError>> {
        let ts = self.segment()?;
        Some(self.cm.get_or_init(|| connection_matrix(ts)).as_ref().map_err(Clone::clone))
    }

    /// Kasteleyn q-flux polynomial of the `n`-fold cover.
    pub fn cover_phi(&self, n: usize) -> Option<Result<LaurentPoly, KasteleynError>> {
        let ts = self.segment()?;
        if n == 1 {
            return Some(self.phi_normalized());
        }
        Some(phi_of(&ts.cover(n), Some(DetMethod::Expansion)).and_then(|p| p.normalized.ok_or(KasteleynError::SignMixture)))
    }

    /// Region summary for reports.
    pub fn summary(&self) -> Value {
        let (white, black) = self.region.color_counts();
        let mut v = json!({
            "regionId": self.id,
            "cells": self.region.len(),
            "white": white,
            "black": black,
            "classification": self.classification,
        });
        if let Some(ts) = self.segment() {
            v["cut"] = json!(ts.cut);
        }
        v
    }

    /// Kasteleyn determinant against the signed sum over all tilings, and
    /// `|Φ(1, 1)|` against the tiling count.
    pub fn oracle_certificate(&self) -> Certification {
        let name = "oracle-equivalence";
        if !self.is_balanced() {
            return Certification::skip(name, "region is not balanced");
        }
        let phi = match self.phi() {
            Ok(p) => p,
            Err(e) => return Certification::fail(name, json!({ "error": e.to_string() })),
        };
        let tilings = self.tilings();
        let by_sum = phi_by_enumeration(&self.surface, tilings);
        let one = BigRational::one();
        let at_one = phi.normalized.as_ref().map(|n| n.eval(&one, &one));
        let count = BigRational::from_integer(tilings.len().into());
        let witness = json!({
            "tilings": tilings.len(),
            "phi": phi.raw.to_string(),
            "enumerationAgrees": by_sum.as_ref().map(|s| *s == phi.raw).unwrap_or(false),
            "signMixture": by_sum.is_err(),
            "phiAtOne": at_one.as_ref().map(|x| x.to_string()),
        });
        if by_sum.is_ok_and(|s| s == phi.raw) && at_one == Some(count) {
            Certification::pass(name, witness)
        } else {
            Certification::fail(name, witness)
        }
    }

    /// Flux constant and volume changing by the flip sign along every flip.
    pub fn flip_structure_certificate(&self) -> Certification {
        let name = "flip-structure";
        let g = match self.flip_graph() {
            Ok(g) => g,
            Err(e) => return Certification::fail(name, json!({ "error": e.to_string() })),
        };
        let fv = match flux_and_volume(&self.surface, &g.tilings) {
            Ok(v) => v,
            Err(e) => return Certification::fail(name, json!({ "error": e.to_string() })),
        };
        let mut bad = Vec::new();
        for e in &g.edges {
            let (f0, v0) = fv[e.from];
            let (f1, v1) = fv[e.to];
            debug_assert_eq!(apply_flip(&self.surface, &g.tilings[e.from], &e.flip), g.tilings[e.to]);
            if f0 != f1 || v1 - v0 != i64::from(e.flip.sign) {
                bad.push(json!({ "from": e.from, "to": e.to, "flux": [f0, f1], "volume": [v0, v1], "sign": e.flip.sign }));
            }
        }
        let witness = json!({ "flips": g.edges.len(), "violations": bad });
        if bad.is_empty() {
            Certification::pass(name, witness)
        } else {
            Certification::fail(name, witness)
        }
    }

    /// Wall-freeness, `None` for disks.
    pub fn wall_free(&self) -> Option<bool> {
        self.walls().map(|w| w.map(|r| r.wall_free).unwrap_or(false))
    }

    fn wall_skip(&self, name: &str) -> Option<Certification> {
        if !self.is_balanced() {
            return Some(Certification::skip(name, "region is not balanced"));
        }
        match self.walls() {
            Some(Ok(r)) if !r.wall_free => {
                let mut c = Certification::skip(name, "annulus has walls");
                c.witness["walls"] = json!(r.walls);
                Some(c)
            }
            Some(Err(e)) => Some(Certification::skip(name, e.to_string())),
            _ => None,
        }
    }

    /// Every certification for this region, in a fixed order.
    pub fn verify(&self, config: &VerifyConfig) -> Vec<Certification> {
        let mut out = Vec::new();
        if let Kind::Other(reason) = &self.kind {
            out.push(Certification::skip("classification", reason.clone()));
            return self.tag(out);
        }
        out.push(self.oracle_certificate());
        if !self.is_balanced() {
            return self.tag(out);
        }
        out.push(self.flip_structure_certificate());
        if let Ok(g) = self.flip_graph() {
            out.push(exactness_check(g));
            let conn = check_flux_connectivity(g);
            match self.wall_skip("flux-connectivity") {
                Some(mut skip) if conn.failed() => {
                    skip.witness["connectivity"] = conn.witness;
                    out.push(skip);
                }
                _ => out.push(conn),
            }
        }
        match &self.kind {
            Kind::Disk => match disk_det_certificate(&self.region) {
                Ok(c) => out.push(c),
                Err(e) => out.push(Certification::skip("disk-determinant", e.to_string())),
            },
            Kind::Annulus(_) => self.verify_annulus(config, &mut out),
            Kind::Other(_) => unreachable!(),
        }
        self.tag(out)
    }

    fn verify_annulus(&self, config: &VerifyConfig, out: &mut Vec<Certification>) {
        let walls = match self.walls() {
            Some(Ok(r)) => json!(r),
            Some(Err(e)) => json!({ "error": e.to_string() }),
            None => Value::Null,
        };
        match self.wall_free() {
            Some(true) => out.push(Certification::pass("wall-free", walls)),
            _ => out.push(Certification::skip("wall-free", "annulus has walls or no tilings").with_witness(walls)),
        }
        let skip = |name: &str| self.wall_skip(name);
        let phi = match self.phi_normalized() {
            Ok(p) => p,
            Err(e) => {
                out.push(Certification::fail("phi", json!({ "error": e.to_string() })));
                return;
            }
        };
        out.push(skip("theorem-a").unwrap_or_else(|| spectral::theorem_a(&phi)));
        for q in &config.q_values {
            let c = skip("theorem-b").unwrap_or_else(|| spectral::theorem_b(&phi, q));
            out.push(suffixed(c, format!("q={q}")));
        }
        for q in &config.q_values {
            let c = skip("log-concavity").unwrap_or_else(|| spectral::log_concavity(&phi, q));
            out.push(suffixed(c, format!("q={q}")));
        }
        let cm = match self.connection_matrix().expect("annulus") {
            Ok(cm) => cm,
            Err(e) => {
                out.push(Certification::fail("connection-matrix", json!({ "error": e.to_string() })));
                return;
            }
        };
        let mut ns: Vec<usize> = vec![1];
        ns.extend(config.cover_degrees.iter().copied().filter(|&n| n > 1));
        for &n in &ns {
            let c = skip("trace-formula").unwrap_or_else(|| self.trace_certificate(cm, n));
            out.push(suffixed(c, format!("n={n}")));
        }
        for &n in &config.cover_degrees {
            if let Some(c) = skip("cover-relation") {
                out.push(suffixed(c, format!("n={n}")));
                continue;
            }
            let cover = match self.cover_phi(n).expect("annulus") {
                Ok(p) => p,
                Err(e) => {
                    let c = Certification::fail("cover-relation", json!({ "error": e.to_string() }));
                    out.push(suffixed(c, format!("n={n}")));
                    continue;
                }
            };
            for q in &config.q_values {
                let c = spectral::cover_relation(&phi, &cover, n, q);
                out.push(suffixed(c, format!("n={n},q={q}")));
            }
        }
        for q in &config.q_values {
            let c = skip("perron").unwrap_or_else(|| spectral::perron(cm, q));
            out.push(suffixed(c, format!("q={q}")));
        }
    }

    /// Transfer trace of the `n`-th power against the Kasteleyn polynomial
    /// of the `n`-fold cover, up to one unit monomial.
    pub fn trace_certificate(&self, cm: &ConnectionMatrix, n: usize) -> Certification {
        let name = "trace-formula";
        let trace = cm.trace_polynomial(n);
        match self.cover_phi(n).expect("annulus") {
            Ok(phi) => {
                let unit = trace.unit_multiple_of(&phi);
                let witness = json!({
                    "n": n,
                    "trace": trace.to_string(),
                    "kasteleyn": phi.to_string(),
                    "unit": unit.map(|u| u.to_string()),
                });
                if unit.is_some() || (trace.is_zero() && phi.is_zero()) {
                    Certification::pass(name, witness)
                } else {
                    Certification::fail(name, witness)
                }
            }
            Err(e) => Certification::fail(name, json!({ "n": n, "error": e.to_string() })),
        }
    }

    fn tag(&self, certs: Vec<Certification>) -> Vec<Certification> {
        certs.into_iter().map(|c| c.with_region(self.id.clone())).collect()
    }
}

fn suffixed(mut c: Certification, params: String) -> Certification {
    c.name = format!("{}[{}]", c.name, params);
    c
}

/// Parameters of `verify`.
#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub q_values: Vec<BigRational>,
    pub cover_degrees: Vec<usize>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        let r = |n: i64, d: i64| BigRational::new(n.into(), d.into());
        VerifyConfig {
            q_values: vec![r(1, 1), r(1, 2), r(2, 1)],
            cover_degrees: vec![2, 3],
        }
    }
}
