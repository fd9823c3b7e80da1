//! File emission.  All floats are printed with 17 significant digits so a run
//! can be compared byte for byte; CSVs are comma-separated with `\n` endings
//! and a mandatory header row.

use std::fs;
use std::io::Write;
use std::path::Path;

use transonic_core::comparison::ExtremaReport;
use transonic_core::free_boundary::{LongDuctCase, TheoremCheck};
use transonic_core::solver::flow_fields;
use transonic_core::{GasModel, PotentialField, TransonicResult};

pub fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn summary_json(r: &TransonicResult) -> String {
    let mut s = String::from("{\n");
    s.push_str(&format!("  \"verdict\": \"{}\",\n", r.verdict));
    s.push_str(&format!("  \"iterations\": {},\n", r.iterations));
    s.push_str(&format!(
        "  \"final_flatness\": {},\n",
        fmt(r.final_flatness)
    ));
    s.push_str(&format!("  \"front_mean\": {},\n", fmt(r.front_mean)));
    s.push_str(&format!("  \"mean_residual\": {},\n", fmt(r.mean_residual)));
    s.push_str(&format!("  \"osc_residual\": {},\n", fmt(r.osc_residual)));
    s.push_str(&format!(
        "  \"min_mach_margin\": {}\n",
        fmt(r.min_mach_margin)
    ));
    s.push('}');
    s
}

pub fn write_text(dir: &Path, name: &str, text: &str) -> Result<(), String> {
    let path = dir.join(name);
    let mut f = fs::File::create(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    f.write_all(text.as_bytes())
        .and_then(|_| if text.ends_with('\n') { Ok(()) } else { f.write_all(b"\n") })
        .map_err(|e| format!("{}: {e}", path.display()))
}

/// Node snapshot, row-major over the grid.
pub fn field_csv(gas: &GasModel, field: &PotentialField) -> Result<String, String> {
    let g = field.grid();
    let (g1, g2) = field.gradient();
    let (_, density, mach) = flow_fields(gas, field).map_err(|e| e.to_string())?;
    let mut s = String::from("x1,x2,phi,dphi_dx1,dphi_dx2,density,mach\n");
    for i in 0..g.n_xi() {
        for j in 0..g.n_eta() {
            s.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                fmt(g.x1(i, j)),
                fmt(g.x2(j)),
                fmt(field.values()[[i, j]]),
                fmt(g1[[i, j]]),
                fmt(g2[[i, j]]),
                fmt(density[[i, j]]),
                fmt(mach[[i, j]]),
            ));
        }
    }
    Ok(s)
}

pub fn theorem_csv(check: &TheoremCheck) -> String {
    let mut s = String::from(
        "c1,perturb_amp,perturb_modes,verdict,iters,final_flatness,front_mean,mean_residual,osc_residual\n",
    );
    for case in &check.cases {
        let r = &case.result;
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            fmt(case.c1),
            fmt(case.perturb_amp),
            case.perturb_modes,
            r.verdict,
            r.iterations,
            fmt(r.final_flatness),
            fmt(r.front_mean),
            fmt(r.mean_residual),
            fmt(r.osc_residual),
        ));
    }
    s
}

pub fn extrema_csv(run_id: &str, report: &ExtremaReport) -> String {
    let mut s = String::from("run_id,kind,tag,i,j,value\n");
    match report {
        ExtremaReport::DegenerateConstantField { range } => {
            s.push_str(&format!("{run_id},degenerate,none,0,0,{}\n", fmt(*range)));
        }
        ExtremaReport::Extrema { max, min } => {
            s.push_str(&format!(
                "{run_id},max,{},{},{},{}\n",
                max.tag.as_str(),
                max.i,
                max.j,
                fmt(max.value)
            ));
            s.push_str(&format!(
                "{run_id},min,{},{},{},{}\n",
                min.tag.as_str(),
                min.i,
                min.j,
                fmt(min.value)
            ));
        }
    }
    s
}

pub fn orthogonality_csv(rows: &[(String, f64, f64, f64)]) -> String {
    let mut s = String::from("run_id,h,slope_wall0,slope_wall1\n");
    for (id, h, s0, s1) in rows {
        s.push_str(&format!("{id},{},{},{}\n", fmt(*h), fmt(*s0), fmt(*s1)));
    }
    s
}

pub fn oscillation_csv(rows: &[(String, f64, f64)]) -> String {
    let mut s = String::from("run_id,x1,osc\n");
    for (id, x1, osc) in rows {
        s.push_str(&format!("{id},{},{}\n", fmt(*x1), fmt(*osc)));
    }
    s
}

/// Stations every half unit from one unit behind the pinned front to half a
/// unit before the exit; used by the long-duct decay table.
pub fn decay_stations(t0: f64, x_exit: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut s = t0 + 1.0;
    while s <= x_exit - 0.5 + 1e-12 {
        out.push(s);
        s += 0.5;
    }
    out
}

pub fn long_duct_rows(
    gas: &GasModel,
    t0: f64,
    cases: &[LongDuctCase],
) -> Result<Vec<(String, f64, f64)>, String> {
    let mut rows = Vec::new();
    for case in cases {
        let id = format!("L{}", case.x_exit);
        let stations = decay_stations(t0, case.x_exit);
        let osc = transonic_core::comparison::oscillation_profile(gas, &case.result.field, &stations)
            .map_err(|e| e.to_string())?;
        for (s, o) in stations.iter().zip(osc) {
            rows.push((id.clone(), *s, o));
        }
    }
    Ok(rows)
}
