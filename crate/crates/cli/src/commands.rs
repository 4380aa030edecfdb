use std::fmt::Write;

use bsgeom::bsgroup::{eval_word, growth as beta, growth_z2, GroupWord};
use bsgeom::dynamics::{contraction_element, pd_census};
use bsgeom::fibercomplex::{barycenter_pi, barycenter_pi_exact, dist_bounds, kappa, leaf_svg, FiberPoint};
use bsgeom::nadic::{CloneBall, Radius};
use bsgeom::quasisim::{
    classify as classify_map, conjugacy_error, conjugate_to_dilation, conjugate_to_translation, test_grid,
    Classification, PLHomeo, PLJson, Scalar, DEFAULT_SEGMENT_CAP,
};
use bsgeom::rigidity::{enumerate_gamma, GammaCase};
use bsgeom::treespace::truncation;
use clap::Args;
use num_rational::BigRational;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{ExperimentConfig, Format};
use crate::error::CliError;
use crate::parse;
use crate::svg::tree_svg;
use crate::Artifact;

type Out = Result<Artifact, CliError>;

fn unsupported(cfg: &ExperimentConfig) -> CliError {
    CliError::Usage(format!("{} output is not available for {}", fmt_name(cfg.format), cfg.command))
}

fn fmt_name(f: Format) -> &'static str {
    match f {
        Format::Json => "json",
        Format::Csv => "csv",
        Format::Svg => "svg",
    }
}

fn radius_json(r: &Radius) -> Value {
    match r.exp {
        None => json!({ "value": "0", "certificate": "exact" }),
        Some(k) => json!({ "value": r.to_rational().to_string(), "power": k, "certificate": "exact" }),
    }
}

#[derive(Args, Debug, Serialize)]
pub struct NadicArgs {
    /// A rational (`-7/12`, `0.375`) or an expansion `base:low:pre|period`.
    #[arg(long, allow_hyphen_values = true)]
    pub value: String,
    /// Second value; reports the distance between the two.
    #[arg(long, allow_hyphen_values = true)]
    pub other: Option<String>,
    /// Digit range `from:to`.
    #[arg(long, allow_hyphen_values = true)]
    pub digits: Option<String>,
    /// Report the clone of this height containing the value.
    #[arg(long, allow_hyphen_values = true)]
    pub height: Option<i64>,
}

pub fn nadic(cfg: &ExperimentConfig, a: &NadicArgs) -> Out {
    let x = parse::nadic(&a.value, cfg.n)?;
    let range = match &a.digits {
        None => None,
        Some(r) => {
            let (lo, hi) = r
                .split_once(':')
                .ok_or_else(|| CliError::Parse(format!("expected from:to, got {r:?}")))?;
            let lo: i64 = lo.parse().map_err(|_| CliError::Parse(format!("bad index {lo:?}")))?;
            let hi: i64 = hi.parse().map_err(|_| CliError::Parse(format!("bad index {hi:?}")))?;
            if hi < lo || hi - lo > 100_000 {
                return Err(CliError::Validation("digit range must satisfy from <= to, at most 100000 digits".into()));
            }
            Some((lo, hi))
        }
    };
    match cfg.format {
        Format::Csv => {
            let (lo, hi) = range.ok_or_else(|| CliError::Usage("csv output needs --digits".into()))?;
            let mut s = String::from("index,digit\n");
            for (i, d) in (lo..=hi).zip(x.digits(lo, hi + 1)) {
                let _ = writeln!(s, "{i},{d}");
            }
            Ok(Artifact::Csv(s))
        }
        Format::Svg => Err(unsupported(cfg)),
        Format::Json => {
            let mut out = json!({
                "value": x.value().to_string(),
                "expansion": x.to_string(),
                "order": x.order(),
                "terminating": x.is_terminating(),
            });
            if let Some((lo, hi)) = range {
                out["digits"] = json!({ "from": lo, "to": hi, "digits": x.digits(lo, hi + 1) });
            }
            if let Some(o) = &a.other {
                let y = parse::nadic(o, cfg.n)?;
                out["dist"] = radius_json(&x.dist(&y));
                out["agreementIndex"] = json!(x.agreement_index(&y));
            }
            if let Some(k) = a.height {
                out["clone"] = serde_json::to_value(CloneBall::containing(&x, k).to_json())?;
            }
            Ok(Artifact::Json(out))
        }
    }
}

#[derive(Args, Debug, Serialize)]
pub struct TreeArgs {
    /// A point of the clone at the root of the picture.
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub value: String,
    /// Height of the root clone.
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    pub height: i64,
    #[arg(long, default_value_t = 3)]
    pub depth: u32,
}

pub fn tree(cfg: &ExperimentConfig, a: &TreeArgs) -> Out {
    let size = (cfg.n as f64).powi(a.depth as i32 + 1);
    if size > cfg.ball_budget as f64 {
        return Err(bsgeom::Error::BudgetExceeded { what: "tree vertices", limit: cfg.ball_budget }.into());
    }
    let root = CloneBall::containing(&parse::nadic(&a.value, cfg.n)?, a.height);
    let t = truncation(&root, a.depth);
    match cfg.format {
        Format::Svg => Ok(Artifact::Svg(tree_svg(&t))),
        Format::Csv => {
            let mut s = String::from("parent_height,parent_center,child_height,child_center\n");
            for &(p, c) in &t.edges {
                let (vp, vc) = (CloneBall::from_json(&t.vertices[p])?, CloneBall::from_json(&t.vertices[c])?);
                let _ = writeln!(s, "{},{},{},{}", vp.height(), vp.center().value(), vc.height(), vc.center().value());
            }
            Ok(Artifact::Csv(s))
        }
        Format::Json => Ok(Artifact::Json(json!({
            "root": root.to_json(),
            "parent": root.parent().to_json(),
            "children": root.children().iter().map(CloneBall::to_json).collect::<Vec<_>>(),
            "treeHeight": root.tree_height(),
            "truncation": t,
            "dot": t.to_dot(),
        }))),
    }
}

#[derive(Args, Debug, Serialize)]
pub struct WordArgs {
    /// Letters a, b and inverses A, B, e.g. `bAbaa`.
    #[arg(long)]
    pub word: String,
}

pub fn word(cfg: &ExperimentConfig, a: &WordArgs) -> Out {
    if cfg.format != Format::Json {
        return Err(unsupported(cfg));
    }
    let w: GroupWord = a.word.parse()?;
    let g = eval_word(&w, cfg.n)?;
    let nf = g.normal_form_word();
    Ok(Artifact::Json(json!({
        "word": w.to_string(),
        "element": g.to_json(),
        "map": g.to_string(),
        "normalForm": nf.to_string(),
        "normalFormLength": nf.len(),
        "identity": g.is_identity(),
        "certificate": "exact",
    })))
}

#[derive(Args, Debug, Serialize)]
pub struct GrowthArgs {
    #[arg(long)]
    pub radius: usize,
    /// Count balls of Z^2 instead, for comparison.
    #[arg(long)]
    pub z2: bool,
}

pub fn growth(cfg: &ExperimentConfig, a: &GrowthArgs) -> Out {
    let counts = if a.z2 {
        growth_z2(a.radius, cfg.ball_budget)?
    } else {
        beta(cfg.n, a.radius, cfg.ball_budget)?
    };
    match cfg.format {
        Format::Csv => {
            let mut s = String::from("L,beta\n");
            for (l, c) in counts.iter().enumerate() {
                let _ = writeln!(s, "{l},{c}");
            }
            Ok(Artifact::Csv(s))
        }
        Format::Svg => Err(unsupported(cfg)),
        Format::Json => Ok(Artifact::Json(json!({
            "group": if a.z2 { "Z^2".to_string() } else { format!("BS(1,{})", cfg.n) },
            "counts": counts,
            "certificate": "exact",
        }))),
    }
}

#[derive(Args, Debug, Serialize)]
pub struct DistArgs {
    /// `x,y,zeta`: plane coordinates (y > 0) and the leaf end.
    #[arg(long, allow_hyphen_values = true)]
    pub pt1: String,
    #[arg(long, allow_hyphen_values = true)]
    pub pt2: String,
}

pub fn dist(cfg: &ExperimentConfig, a: &DistArgs) -> Out {
    let (x1, y1, z1) = parse::fiber_point(&a.pt1, cfg.n)?;
    let (x2, y2, z2) = parse::fiber_point(&a.pt2, cfg.n)?;
    match cfg.format {
        Format::Svg => {
            if x1 == x2 {
                return Err(CliError::Usage("svg needs distinct x coordinates".into()));
            }
            Ok(Artifact::Svg(leaf_svg(cfg.n, x1.min(x2), x1.max(x2))?))
        }
        Format::Csv => Err(unsupported(cfg)),
        Format::Json => {
            let p1 = FiberPoint::on_leaf(&z1, x1, y1)?;
            let p2 = FiberPoint::on_leaf(&z2, x2, y2)?;
            let b = dist_bounds(&p1, &p2)?;
            let cert = if b.common_plane.is_some() { "common leaf: hyperbolic distance" } else { "interval" };
            Ok(Artifact::Json(json!({
                "lo": b.lo,
                "hi": b.hi,
                "commonPlane": b.common_plane,
                "certificate": { "kind": cert, "width": b.hi - b.lo },
            })))
        }
    }
}

#[derive(Args, Debug, Serialize)]
pub struct BarycenterArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub x: String,
    #[arg(long, allow_hyphen_values = true)]
    pub y: String,
    /// End of the leaf.
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub zeta: String,
    /// Second n-adic end; adds the tree median of (eta, zeta, -infinity).
    #[arg(long, allow_hyphen_values = true)]
    pub eta: Option<String>,
}

pub fn barycenter(cfg: &ExperimentConfig, a: &BarycenterArgs) -> Out {
    let (x, y) = (parse::rational(&a.x)?, parse::rational(&a.y)?);
    let zeta = parse::nadic(&a.zeta, cfg.n)?;
    match cfg.format {
        Format::Svg => {
            let (lo, hi) = if x < y { (&x, &y) } else { (&y, &x) };
            Ok(Artifact::Svg(leaf_svg(cfg.n, lo.to_f64(), hi.to_f64())?))
        }
        Format::Csv => Err(unsupported(cfg)),
        Format::Json => {
            let p = barycenter_pi(x.to_f64(), y.to_f64(), &zeta)?;
            let e = barycenter_pi_exact(&x, &y, &zeta)?;
            let h = p.proj_p();
            let mut out = json!({
                "pi": {
                    "x": h.x,
                    "y": h.y,
                    "treeVertex": p.proj_q().upper_vertex().to_json(),
                    "treeOffset": p.proj_q().offset(),
                },
                "exact": {
                    "x": e.mid.to_string(),
                    "yOverSqrt3": e.half_width.to_string(),
                    "certificate": "exact: y = sqrt(3) * yOverSqrt3",
                },
            });
            if let Some(eta) = &a.eta {
                let k = kappa(&x, &parse::nadic(eta, cfg.n)?, &zeta)?;
                out["kappa"] = json!({ "x": k.x.to_string(), "vertex": k.vertex.to_json(), "certificate": "exact" });
            }
            Ok(Artifact::Json(out))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ConjugateMode {
    Auto,
    Translation,
    Dilation,
}

#[derive(Args, Debug, Serialize)]
pub struct ConjugateArgs {
    /// JSON file with `breakpoints`, `slopes` and `tails`.
    #[arg(long)]
    pub input: std::path::PathBuf,
    #[arg(long, value_enum, default_value_t = ConjugateMode::Auto)]
    pub mode: ConjugateMode,
    /// Half-width of the interval on which the conjugacy is built and tested.
    #[arg(long, default_value_t = 1000)]
    pub window: i64,
    /// Largest power used for stretch estimates.
    #[arg(long, default_value_t = 32)]
    pub max_power: i64,
}

pub fn conjugate(cfg: &ExperimentConfig, a: &ConjugateArgs) -> Out {
    if cfg.format != Format::Json {
        return Err(unsupported(cfg));
    }
    let text = std::fs::read_to_string(&a.input)?;
    let js: PLJson = serde_json::from_str(&text)?;
    let f: PLHomeo<BigRational> = PLHomeo::from_json(&js)?;
    let mode = match a.mode {
        ConjugateMode::Auto => match classify_map(&f, a.max_power, cfg.breakpoint_cap)?.class {
            Classification::NoFixedPoint { .. } => ConjugateMode::Translation,
            Classification::UniqueFixedPoint { .. } => ConjugateMode::Dilation,
            Classification::NotUniformQs { witness } => {
                return Ok(Artifact::Json(json!({ "case": "not-uniform", "witness": witness })));
            }
        },
        m => m,
    };
    let window = BigRational::from_integer(a.window.into());
    let grid = test_grid(a.window as f64, cfg.grid_size);
    let ff = f.to_f64_map();
    let out = if mode == ConjugateMode::Translation {
        let c = conjugate_to_translation(&f, &BigRational::from_integer(0.into()), &window, DEFAULT_SEGMENT_CAP)?;
        let alpha = c.alpha.to_f64();
        let err = conjugacy_error(&ff, &c.phi.to_f64_map(), |y| y + alpha, &grid);
        json!({
            "case": "translation",
            "s_or_alpha": alpha,
            "alpha": c.alpha.to_string(),
            "bilipK": c.phi.bilipschitz_constant().to_f64(),
            "supError": err,
            "phi": c.phi.to_json(),
            "certificate": { "alpha": "exact", "supErrorWithinTolerance": err <= cfg.tolerance },
        })
    } else {
        let cutoff = BigRational::from_f64(1e-12);
        let c = conjugate_to_dilation(&f, a.max_power, cfg.breakpoint_cap, &window, &cutoff, DEFAULT_SEGMENT_CAP)?;
        let used = if c.inverted { c.s_used.recip() } else { c.s_used.clone() };
        let m = used.to_f64();
        let err = conjugacy_error(&ff, &c.phi.to_f64_map(), |y| m * y, &grid);
        json!({
            "case": "dilation",
            "s_or_alpha": c.s,
            "s": c.s,
            "sUsed": used.to_string(),
            "fixedPoint": c.fixed_point.to_string(),
            "bilipK": c.phi.bilipschitz_constant().to_f64(),
            "supError": err,
            "phi": c.phi.to_json(),
            "certificate": {
                "sRelErr": c.estimate.rel_err,
                "K": c.k,
                "supErrorWithinTolerance": err <= cfg.tolerance,
            },
        })
    };
    Ok(Artifact::Json(out))
}

#[derive(Args, Debug, Serialize)]
pub struct CensusArgs {
    /// Three factors separated by `;`: `lo,hi` for a real interval, `center@height`
    /// for a clone; or `standard` / `control`.
    #[arg(long, allow_hyphen_values = true)]
    pub block: String,
    #[arg(long)]
    pub radius: usize,
}

pub fn census(cfg: &ExperimentConfig, a: &CensusArgs) -> Out {
    let block = parse::block(&a.block, cfg.n)?;
    let c = pd_census(&block, cfg.n, a.radius, cfg.ball_budget)?;
    match cfg.format {
        Format::Csv => Ok(Artifact::Csv(c.to_csv())),
        Format::Svg => Err(unsupported(cfg)),
        Format::Json => Ok(Artifact::Json(json!({ "census": c, "certificate": "exact" }))),
    }
}

#[derive(Args, Debug, Serialize)]
pub struct ContractArgs {
    /// Clone to contract, `center@height`.
    #[arg(long, allow_hyphen_values = true)]
    pub inner: String,
    /// Target clone, `center@height`.
    #[arg(long, allow_hyphen_values = true)]
    pub outer: String,
}

pub fn contract(cfg: &ExperimentConfig, a: &ContractArgs) -> Out {
    if cfg.format != Format::Json {
        return Err(unsupported(cfg));
    }
    let k = parse::clone_ball(&a.inner, cfg.n)?;
    let u = parse::clone_ball(&a.outer, cfg.n)?;
    let c = contraction_element(&k, &u)?;
    Ok(Artifact::Json(serde_json::to_value(c)?))
}

#[derive(Args, Debug, Serialize)]
pub struct ClassifyArgs {
    /// One of 1, 2, 3i, 3ii.
    #[arg(long = "case")]
    pub case: String,
    #[arg(long, allow_hyphen_values = true)]
    pub m: i64,
}

pub fn classify(cfg: &ExperimentConfig, a: &ClassifyArgs) -> Out {
    if cfg.format != Format::Json {
        return Err(unsupported(cfg));
    }
    let case: GammaCase = a.case.parse()?;
    let p = enumerate_gamma(case, a.m)?;
    Ok(Artifact::Json(json!({
        "presentation": p,
        "text": p.to_string(),
        "gap": p.to_gap(),
    })))
}
