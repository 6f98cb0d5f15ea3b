//! CSV and JSON emission for the computed artifacts. Floats print through
//! the shortest round-trip formatter, so identical values give identical
//! bytes no matter how many threads produced them.

use serde_json::{json, Value};

use crate::cxserde;
use crate::dilatation::{BeltramiField, ModulusCurve};
use crate::koenigs::{ControlReport, CoordinateGrid, FixedPointReport};
use crate::motion::{ExtendedMotion, MotionAxiomReport, MotionSample};
use crate::BoettcherResult;

fn num(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::Null
    }
}

/// Columns: r, theta, re_mu, im_mu, abs_mu. Invalid nodes keep their
/// coordinates and leave the mu fields empty.
pub fn beltrami_csv(field: &BeltramiField) -> String {
    let mut out = String::from("r,theta,re_mu,im_mu,abs_mu\n");
    for ((ring, angle, _), mu) in field.grid.nodes().zip(&field.mu) {
        let r = field.grid.radii[ring];
        let theta = field.grid.theta(angle);
        match mu {
            Some(m) => out.push_str(&format!(
                "{},{},{},{},{}\n",
                r,
                theta,
                m.re,
                m.im,
                m.norm()
            )),
            None => out.push_str(&format!("{},{},,,\n", r, theta)),
        }
    }
    out
}

pub fn beltrami_summary_json(field: &BeltramiField) -> Value {
    json!({
        "sup_abs_mu": num(field.sup_abs_mu()),
        "invalid_nodes": field.invalid_count(),
        "nodes": field.grid.len(),
        "fd_step": num(field.fd_step),
    })
}

/// Columns: t, omega.
pub fn modulus_csv(curve: &ModulusCurve) -> String {
    let mut out = String::from("t,omega\n");
    for (t, w) in curve.thresholds.iter().zip(&curve.omega) {
        out.push_str(&format!("{},{}\n", t, w));
    }
    out
}

pub fn modulus_summary_json(curve: &ModulusCurve) -> Value {
    json!({
        "integral": num(curve.integral),
        "divergent": curve.divergent,
        "head_exponent": curve.head_fit.map_or(Value::Null, |f| num(f.exponent)),
        "head_coeff": curve.head_fit.map_or(Value::Null, |f| num(f.coeff)),
        "sup_omega": num(*curve.omega.last().unwrap()),
        "t_range": [num(curve.t_min()), num(curve.t_max())],
    })
}

/// Columns: r, theta, re_psi, im_psi, depth, residual.
pub fn coordinate_csv(cg: &CoordinateGrid) -> String {
    let mut out = String::from("r,theta,re_psi,im_psi,depth,residual\n");
    for (i, (ring, angle, _)) in cg.grid.nodes().enumerate() {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            cg.grid.radii[ring],
            cg.grid.theta(angle),
            cg.psi[i].re,
            cg.psi[i].im,
            cg.depth[i],
            cg.residual[i]
        ));
    }
    out
}

pub fn coordinate_summary_json(cg: &CoordinateGrid) -> Value {
    json!({
        "max_residual": num(cg.max_residual),
        "normalization_error": num(cg.normalization_error),
        "multiplier": cxserde::to_json(cg.multiplier),
        "class": serde_json::to_value(cg.class).unwrap(),
        "nodes": cg.grid.len(),
        "max_depth": cg.depth.iter().copied().max().unwrap_or(0),
    })
}

pub fn boettcher_summary_json(res: &BoettcherResult) -> Value {
    let mut v = coordinate_summary_json(&res.psi);
    let obj = v.as_object_mut().unwrap();
    obj.insert("n".into(), json!(res.n));
    obj.insert("b".into(), cxserde::to_json(res.b));
    v
}

pub fn classify_summary_json(report: &FixedPointReport) -> Value {
    serde_json::to_value(report).unwrap()
}

pub fn control_summary_json(report: &ControlReport) -> Value {
    serde_json::to_value(report).unwrap()
}

/// Columns: c_re, c_im, r, theta, H_re, H_im over every (c, point of E).
pub fn motion_csv(ms: &MotionSample) -> String {
    let mut out = String::from("c_re,c_im,r,theta,H_re,H_im\n");
    let samples = ms.s_points.len();
    for (ci, row) in ms.values.iter().enumerate() {
        let c = ms.c_samples[ci];
        for (k, v) in row.iter().enumerate() {
            let (radius, angle) = if k < samples {
                (ms.s_radius, k)
            } else {
                (ms.t_radius, k - samples)
            };
            let theta = std::f64::consts::TAU * angle as f64 / samples as f64;
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                c.re, c.im, radius, theta, v.re, v.im
            ));
        }
    }
    out
}

/// Same column scheme over the extension grid.
pub fn extended_motion_csv(em: &ExtendedMotion) -> String {
    let mut out = String::from("c_re,c_im,r,theta,H_re,H_im\n");
    for (ci, row) in em.values.iter().enumerate() {
        let c = em.base.c_samples[ci];
        for ((ring, angle, _), v) in em.grid.nodes().zip(row) {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                c.re,
                c.im,
                em.grid.radii[ring],
                em.grid.theta(angle),
                v.re,
                v.im
            ));
        }
    }
    out
}

pub fn motion_axioms_json(ms: &MotionSample, report: &MotionAxiomReport) -> Value {
    json!({
        "kind": serde_json::to_value(ms.kind).unwrap(),
        "r": num(ms.r),
        "s_radius": num(ms.s_radius),
        "t_radius": num(ms.t_radius),
        "c_count": ms.c_samples.len(),
        "points_per_circle": ms.s_points.len(),
        "axioms": serde_json::to_value(report).unwrap(),
    })
}

pub fn extended_motion_summary_json(em: &ExtendedMotion) -> Value {
    let per_c: Vec<Value> = em
        .base
        .c_samples
        .iter()
        .zip(em.measured_k.iter().zip(&em.bound))
        .map(|(c, (k, b))| {
            json!({
                "c": cxserde::to_json(*c),
                "abs_c": num(c.norm()),
                "measured_k": num(*k),
                "theorem_bound": num(*b),
            })
        })
        .collect();
    json!({
        "rings": em.grid.rings(),
        "per_c": per_c,
    })
}
