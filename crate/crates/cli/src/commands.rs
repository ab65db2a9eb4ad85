use std::fmt::Write as _;
use std::io::Read as _;
use std::path::Path;

use num_complex::Complex64;
use qflux::algebra::{numeric_roots, BigRational, LaurentPoly, SignedMonomial};
use qflux::analysis::{Analysis, Kind, VerifyConfig};
use qflux::cert::{Certification, Verdict};
use qflux::region::GridRegion;
use qflux::transfer::ConnectionMatrix;
use rayon::prelude::*;
use serde_json::{json, Value};

/// What a command produced: the text report, its JSON twin, and whether a
/// certification failed.
pub struct Output {
    pub text: String,
    pub json: Value,
    pub failed: bool,
}

impl Output {
    fn new(text: String, json: Value) -> Self {
        Output {
            text,
            json,
            failed: false,
        }
    }
}

fn region_id(path: &Path) -> String {
    if path == Path::new("-") {
        return "stdin".into();
    }
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| path.display().to_string())
}

fn load(path: &Path) -> Result<Analysis, String> {
    let text = if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| format!("stdin: {e}"))?;
        s
    } else {
        std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?
    };
    let region = GridRegion::parse(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(Analysis::new(region_id(path), region))
}

fn need_balanced(a: &Analysis) -> Result<(), String> {
    if a.is_balanced() {
        Ok(())
    } else {
        let (w, b) = a.region.color_counts();
        Err(format!("{}: region is not balanced ({w} white, {b} black)", a.id))
    }
}

fn need_annulus(a: &Analysis) -> Result<(), String> {
    if a.segment().is_none() {
        return Err(format!("{}: region is a {}, not an annulus", a.id, a.classification.name()));
    }
    Ok(())
}

pub fn validate(path: &Path) -> Result<Output, String> {
    let a = load(path)?;
    let summary = a.summary();
    let (white, black) = a.region.color_counts();
    let mut text = format!(
        "{}: {} with {} cells ({white} white, {black} black), {}\n",
        a.id,
        a.classification.name(),
        a.region.len(),
        if a.is_balanced() { "balanced" } else { "unbalanced" }
    );
    if let Some(ts) = a.segment() {
        let _ = writeln!(text, "hole: {} cells", ts.annulus.hole.len());
        let _ = writeln!(
            text,
            "cut: {} edges, {} crossings{}",
            ts.cut.path.len() - 1,
            ts.cut.crossings.len(),
            if ts.cut.straight { "" } else { " (not straight)" }
        );
    }
    if let qflux::region::Classification::Other { reason } = &a.classification {
        let _ = writeln!(text, "note: {reason}");
    }
    text.push_str(&a.region.render());
    Ok(Output::new(text, summary))
}

pub fn tilings(path: &Path, _count: bool, list: bool) -> Result<Output, String> {
    let a = load(path)?;
    need_balanced(&a)?;
    let tilings = a.tilings();
    let mut text = format!("{}\n", tilings.len());
    let mut json = json!({ "regionId": a.id, "count": tilings.len() });
    if list {
        let rendered: Vec<String> = tilings.iter().map(|t| t.render(a.surface())).collect();
        for r in &rendered {
            text.push('\n');
            text.push_str(r);
        }
        json["tilings"] = json!(rendered);
    }
    Ok(Output::new(text, json))
}

pub fn flipgraph(path: &Path, dot: bool) -> Result<Output, String> {
    let a = load(path)?;
    need_balanced(&a)?;
    let g = a.flip_graph().map_err(|e| format!("{}: {e}", a.id))?;
    if dot {
        let d = g.to_dot();
        return Ok(Output::new(d.clone(), json!({ "regionId": a.id, "dot": d })));
    }
    let components = g.components();
    let mut per_flux: std::collections::BTreeMap<i64, (usize, usize)> = Default::default();
    for (&f, &n) in &g.flux_classes() {
        per_flux.entry(f).or_default().0 = n;
    }
    for c in &components {
        per_flux.entry(g.flux[c[0]]).or_default().1 += 1;
    }
    let mut text = format!(
        "{}: {} tilings, {} flips, {} components\n",
        a.id,
        g.tilings.len(),
        g.edges.len(),
        components.len()
    );
    let mut classes = Vec::new();
    for (f, (n, c)) in &per_flux {
        let _ = writeln!(text, "  flux {f}: {n} tilings in {c} component(s)");
        classes.push(json!({ "flux": f, "tilings": n, "components": c }));
    }
    let json = json!({
        "regionId": a.id,
        "tilings": g.tilings.len(),
        "flips": g.edges.len(),
        "components": components.len(),
        "fluxClasses": classes,
    });
    Ok(Output::new(text, json))
}

pub fn walls(path: &Path) -> Result<Output, String> {
    let a = load(path)?;
    need_annulus(&a)?;
    need_balanced(&a)?;
    let report = a.walls().expect("annulus").map_err(|e| format!("{}: {e}", a.id))?;
    let mut text = if report.wall_free {
        format!("{}: wall-free\n", a.id)
    } else {
        format!("{}: {} wall(s)\n", a.id, report.walls.len())
    };
    for w in &report.walls {
        let _ = writeln!(text, "  {:?} wall of {} sides", w.kind, w.sides.len());
    }
    let _ = writeln!(text, "uncrossed interior sides: {}", report.uncrossed.len());
    let mut json = json!(report);
    json["regionId"] = json!(a.id);
    Ok(Output::new(text, json))
}

/// Splits `f = p^a q^b g` with `g` having no negative exponents and a
/// nonzero term free of `p` and one free of `q`.
fn factor_shift(f: &LaurentPoly) -> (i64, i64, LaurentPoly) {
    let (Some((a, _)), Some((b, _))) = (f.p_range(), f.q_range()) else {
        return (0, 0, f.clone());
    };
    (a, b, f.mul_monomial(SignedMonomial::new(1, -a, -b)))
}

fn shifted(a: i64, b: i64, g: &LaurentPoly) -> String {
    let mut s = String::new();
    if a != 0 {
        let _ = write!(s, "p^{a}*");
    }
    if b != 0 {
        let _ = write!(s, "q^{b}*");
    }
    if s.is_empty() {
        g.to_string()
    } else {
        format!("{s}({g})")
    }
}

fn format_root(r: &Complex64) -> String {
    if r.im.abs() <= 1e-12 * r.re.abs().max(1.0) {
        format!("{:.6}", r.re)
    } else {
        format!("{:.6}{:+.6}i", r.re, r.im)
    }
}

pub fn phi(path: &Path, q_at: Option<&BigRational>, normalized: bool) -> Result<Output, String> {
    let a = load(path)?;
    need_balanced(&a)?;
    let phi = a.phi().map_err(|e| format!("{}: {e}", a.id))?;
    let shown = if normalized {
        a.phi_normalized().map_err(|e| format!("{}: {e}", a.id))?
    } else {
        phi.raw.clone()
    };
    let (pa, qb, core) = factor_shift(&shown);
    let mut text = format!("Phi = {shown}\n");
    let _ = writeln!(text, "    = {}", shifted(pa, qb, &core));
    let _ = writeln!(text, "shift: p^{} q^{}", -pa, -qb);
    let mut json = json!({
        "regionId": a.id,
        "phi": shown.to_string(),
        "raw": phi.raw.to_string(),
        "shift": { "p": -pa, "q": -qb },
        "factor": core.to_string(),
    });
    if let Some(n) = &phi.normalization {
        json["normalization"] = json!({ "sign": n.sign, "reflected": n.reflected });
    }
    if let Some(q0) = q_at {
        let (k, g) = shown.specialize_q(q0);
        let _ = writeln!(text, "Phi(p, {q0}) = p^{} * ({g})", -k);
        let roots = if g.degree().unwrap_or(0) >= 1 {
            numeric_roots(&g).map_err(|e| format!("{}: {e}", a.id))?
        } else {
            Vec::new()
        };
        let mut sorted = roots.clone();
        sorted.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
        let listed: Vec<String> = sorted.iter().map(format_root).collect();
        let _ = writeln!(text, "roots: {}", if listed.is_empty() { "none".into() } else { listed.join(", ") });
        json["specialization"] = json!({
            "q": q0.to_string(),
            "shift": k,
            "polynomial": g.to_string(),
            "roots": sorted.iter().map(|r| [r.re, r.im]).collect::<Vec<_>>(),
        });
    }
    Ok(Output::new(text, json))
}

fn sides_label(sides: &[usize]) -> String {
    let inner: Vec<String> = sides.iter().map(usize::to_string).collect();
    format!("{{{}}}", inner.join(","))
}

fn block_text(cm: &ConnectionMatrix, idx: &[usize], text: &mut String) {
    for &i in idx {
        let row: Vec<String> = idx.iter().map(|&j| cm.entries[i][j].to_string()).collect();
        let _ = writeln!(text, "    [{}]", row.join(", "));
    }
}

pub fn transfer(path: &Path, n: usize, show_blocks: bool, bi_active: bool) -> Result<Output, String> {
    if n == 0 {
        return Err("--n must be at least 1".into());
    }
    let a = load(path)?;
    need_annulus(&a)?;
    need_balanced(&a)?;
    let cm = a.connection_matrix().expect("annulus").map_err(|e| format!("{}: {e}", a.id))?;
    let one = BigRational::from_integer(1.into());
    let active = if bi_active { cm.bi_active(&one) } else { vec![false; cm.shapes.len()] };
    let mut text = format!("{}: {} shapes\n", a.id, cm.shapes.len());
    let mut shapes = Vec::new();
    for (i, s) in cm.shapes.iter().enumerate() {
        let mark = if active[i] { " *" } else { "" };
        let _ = writeln!(text, "  {i:>3}  flux {:>3}  sides {}{mark}", s.flux, sides_label(&s.sides));
        let mut v = json!({ "index": i, "flux": s.flux, "sides": s.sides });
        if bi_active {
            v["biActive"] = json!(active[i]);
        }
        shapes.push(v);
    }
    let mut blocks = Vec::new();
    for (f, idx) in cm.fluxes() {
        let _ = writeln!(text, "block flux {f}: {0}x{0}", idx.len());
        if show_blocks {
            block_text(cm, &idx, &mut text);
        }
        let mut b = json!({ "flux": f, "shapes": idx });
        if show_blocks {
            b["entries"] = json!(idx
                .iter()
                .map(|&i| idx.iter().map(|&j| cm.entries[i][j].to_string()).collect::<Vec<_>>())
                .collect::<Vec<_>>());
        }
        if bi_active {
            let sub: Vec<usize> = idx.iter().copied().filter(|&i| active[i]).collect();
            b["biActive"] = json!(sub);
        }
        blocks.push(b);
    }
    let trace = cm.trace_polynomial(n);
    let _ = writeln!(text, "trace (n={n}): {trace}");
    let json = json!({
        "regionId": a.id,
        "shapes": shapes,
        "blocks": blocks,
        "undefined": cm.undefined,
        "trace": { "n": n, "polynomial": trace.to_string() },
    });
    Ok(Output::new(text, json))
}

fn threads() -> usize {
    std::env::var(crate::THREADS_VAR)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .filter(|&n: &usize| n > 0)
        .unwrap_or(0)
}

struct RegionRun {
    summary: Value,
    phi: Option<String>,
    certs: Vec<Certification>,
}

fn run_region(a: &Analysis, config: &VerifyConfig) -> RegionRun {
    let certs = a.verify(config);
    let phi = if a.is_balanced() {
        a.phi_normalized().ok().map(|p| p.to_string())
    } else {
        None
    };
    let mut summary = a.summary();
    if a.is_balanced() && !matches!(a.kind, Kind::Other(_)) {
        summary["tilings"] = json!(a.tilings().len());
    }
    summary["phi"] = json!(phi);
    RegionRun { summary, phi, certs }
}

pub fn verify(
    paths: &[std::path::PathBuf],
    q_values: Vec<BigRational>,
    covers: Vec<usize>,
    report: Option<&Path>,
) -> Result<Output, String> {
    let mut config = VerifyConfig::default();
    if !q_values.is_empty() {
        if let Some(q) = q_values.iter().find(|q| **q <= BigRational::from_integer(0.into())) {
            return Err(format!("--q must be positive, got {q}"));
        }
        config.q_values = q_values;
    }
    if !covers.is_empty() {
        if covers.contains(&0) {
            return Err("--cover must be at least 1".into());
        }
        config.cover_degrees = covers;
    }
    let analyses = paths.iter().map(|p| load(p)).collect::<Result<Vec<_>, _>>()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads())
        .build()
        .map_err(|e| e.to_string())?;
    let mut runs: Vec<RegionRun> = pool.install(|| analyses.par_iter().map(|a| run_region(a, &config)).collect());
    runs.sort_by(|x, y| x.summary["regionId"].as_str().cmp(&y.summary["regionId"].as_str()));

    let mut text = String::new();
    let (mut pass, mut fail, mut skip) = (0, 0, 0);
    let mut certs = Vec::new();
    for run in &runs {
        let s = &run.summary;
        let _ = writeln!(
            text,
            "{}: {}, {} cells",
            s["regionId"].as_str().unwrap_or(""),
            s["classification"]["kind"].as_str().unwrap_or("?"),
            s["cells"]
        );
        if let Some(phi) = &run.phi {
            let _ = writeln!(text, "  Phi = {phi}");
        }
        for c in &run.certs {
            match c.verdict {
                Verdict::Pass => pass += 1,
                Verdict::Fail => fail += 1,
                Verdict::Skip => skip += 1,
            }
            let _ = writeln!(text, "  {} {}", c.verdict, c.name);
            certs.push(c.clone());
        }
    }
    let _ = writeln!(text, "{pass} passed, {fail} failed, {skip} skipped");
    let json = json!({
        "regions": runs.iter().map(|r| r.summary.clone()).collect::<Vec<_>>(),
        "certifications": certs,
        "totals": { "pass": pass, "fail": fail, "skip": skip },
    });
    if let Some(path) = report {
        let body = serde_json::to_string_pretty(&json).unwrap() + "\n";
        std::fs::write(path, body).map_err(|e| format!("{}: {e}", path.display()))?;
    }
    Ok(Output {
        text,
        json,
        failed: fail > 0,
    })
}
