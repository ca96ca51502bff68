//! Plot-ready file formats: CSV with '.' decimals, ',' separators, LF line
//! endings and 17 significant digits (lossless double round-trip), plus JSON
//! legends and reports.

use crate::bifurcation::{
    BifurcationEvent, BranchDiagram, Criticality, EventKind, StabilityRaster,
    REGION_AGGLOMERATION, REGION_ASYMMETRIC, REGION_SYMMETRIC,
};
use crate::migration::{BasinMap, CoupledSample, MigrationSample};
use crate::quality::QualitySample;

/// Formats a real with 17 significant digits, enough to reconstruct the exact
/// double.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn quality_trajectory_csv(samples: &[QualitySample]) -> String {
    let mut out = String::from("t,a1,a2,V\n");
    for s in samples {
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt_real(s.t),
            fmt_real(s.a1),
            fmt_real(s.a2),
            fmt_real(s.v)
        ));
    }
    out
}

pub fn migration_trajectory_csv(samples: &[MigrationSample]) -> String {
    let mut out = String::from("t,z,delta_v\n");
    for s in samples {
        out.push_str(&format!(
            "{},{},{}\n",
            fmt_real(s.t),
            fmt_real(s.z),
            fmt_real(s.gap)
        ));
    }
    out
}

pub fn coupled_trajectory_csv(samples: &[CoupledSample]) -> String {
    let mut out = String::from("t,z,a1,a2,delta_v\n");
    for s in samples {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_real(s.t),
            fmt_real(s.z),
            fmt_real(s.a1),
            fmt_real(s.a2),
            fmt_real(s.gap)
        ));
    }
    out
}

pub fn basin_csv(map: &BasinMap) -> String {
    let mut out = String::from("z0,terminal_id\n");
    for (z0, idx) in &map.assignments {
        let id = idx.map_or(-1i64, |k| k as i64);
        out.push_str(&format!("{},{}\n", fmt_real(*z0), id));
    }
    out
}

pub fn branch_csv(diagram: &BranchDiagram) -> String {
    let mut out = String::from("phi,z_star,stable,tangent\n");
    for br in &diagram.branches {
        for q in &br.points {
            out.push_str(&format!(
                "{},{},{},{}\n",
                fmt_real(q.phi),
                fmt_real(q.z_star),
                q.stable,
                fmt_real(q.tangent_dz_dphi)
            ));
        }
    }
    out
}

pub fn event_csv(events: &[BifurcationEvent]) -> String {
    let mut out = String::from("kind,phi,z_star,criticality,varsigma\n");
    for e in events {
        let kind = match e.kind {
            EventKind::Pitchfork => "pitchfork",
            EventKind::Fold => "fold",
        };
        let crit = match e.criticality {
            Some(Criticality::Supercritical) => "supercritical",
            Some(Criticality::Subcritical) => "subcritical",
            Some(Criticality::Degenerate) => "degenerate",
            None => "",
        };
        let vs = e.varsigma.map(fmt_real).unwrap_or_default();
        out.push_str(&format!(
            "{kind},{},{},{crit},{vs}\n",
            fmt_real(e.phi),
            fmt_real(e.z_star)
        ));
    }
    out
}

pub fn raster_csv(raster: &StabilityRaster) -> String {
    let mut out = String::from("phi,b,labelmask\n");
    for (j, &b) in raster.bs.iter().enumerate() {
        for (i, &p) in raster.phis.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{}\n",
                fmt_real(p),
                fmt_real(b),
                raster.mask_at(i, j)
            ));
        }
    }
    out
}

/// Legend mapping raster mask bits and derived regions to meanings.
pub fn raster_legend_json() -> serde_json::Value {
    serde_json::json!({
        "bits": {
            REGION_AGGLOMERATION.to_string(): "agglomeration stable",
            REGION_SYMMETRIC.to_string(): "symmetric dispersion stable",
            REGION_ASYMMETRIC.to_string(): "asymmetric dispersion stable",
        },
        "regions": {
            "A": { "description": "agglomeration stable", "test": "mask & 1 != 0" },
            "B": { "description": "symmetric dispersion stable", "test": "mask & 2 != 0" },
            "C": { "description": "asymmetric dispersion stable", "test": "mask & 4 != 0" },
            "D": { "description": "agglomeration and symmetric dispersion both stable", "test": "mask & 3 == 3" },
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_round_trip_exactly() {
        for x in [
            0.1,
            1.0 / 3.0,
            std::f64::consts::PI,
            6.02e23,
            -3.3e-18,
            0.40100646818459034,
        ] {
            let s = fmt_real(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back, x, "round trip failed for {s}");
        }
    }

    #[test]
    fn csv_shapes() {
        let samples = vec![
            QualitySample { t: 0.0, a1: 0.2, a2: 0.9, v: 0.3 },
            QualitySample { t: 1.0, a1: 0.5, a2: 0.6, v: 0.01 },
        ];
        let csv = quality_trajectory_csv(&samples);
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.starts_with("t,a1,a2,V\n"));
        assert!(!csv.contains('\r'));
    }
}
