//! Virtual sequence numbers: 12 rotor states per electrical cycle.
//!
//! Six odd states cover the interiors of the conventional commutation
//! steps and six even states cover the transitions between them, so each
//! state spans 30 electrical degrees, i.e. `30 / K_p` mechanical degrees.
//! A pole-pair machine therefore exposes `12 * K_p` distinct rotor slots
//! per mechanical revolution (96 for `K_p = 8`).
//!
//! The training label of a slot is the sine/cosine pair of its midpoint
//! mechanical angle, computed analytically; slot intervals are half-open
//! `[lo, hi)` so the slots tile the circle exactly.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::num::{cos_deg, floor, sin_deg};
use crate::pipeline::DatasetRow;

/// One labelled rotor slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VsnLabel {
    /// Virtual sequence number within the electrical cycle, 1-12.
    pub vsn: u8,
    /// Electrical cycle within the mechanical revolution, 1-`K_p`.
    pub elec_cycle: u32,
    /// Global slot index, 1-`12*K_p`; equals `(elec_cycle-1)*12 + vsn`.
    pub global_index: u32,
    /// Sine of the slot's midpoint mechanical angle.
    pub sin_label: f64,
    /// Cosine of the slot's midpoint mechanical angle.
    pub cos_label: f64,
}

/// Mechanical width of one slot, degrees.
#[inline]
pub fn slot_width_deg(pole_pairs: u32) -> f64 {
    30.0 / pole_pairs as f64
}

/// Midpoint mechanical angle of a 0-based global slot.
#[inline]
pub fn slot_midpoint_deg(global_slot: u32, pole_pairs: u32) -> f64 {
    (global_slot as f64 + 0.5) * slot_width_deg(pole_pairs)
}

/// Map a mechanical angle to its slot.
pub fn angle_to_vsn(mech_angle_deg: f64, pole_pairs: u32) -> Result<VsnLabel> {
    if pole_pairs == 0 {
        return Err(Error::Domain("pole_pairs must be >= 1".into()));
    }
    if !mech_angle_deg.is_finite() || !(0.0..360.0).contains(&mech_angle_deg) {
        return Err(Error::Domain(format!(
            "mechanical angle {mech_angle_deg} outside [0, 360)"
        )));
    }
    let width = slot_width_deg(pole_pairs);
    let slots = 12 * pole_pairs;
    let g = (floor(mech_angle_deg / width) as u32).min(slots - 1);
    let mid = slot_midpoint_deg(g, pole_pairs);
    Ok(VsnLabel {
        vsn: (g % 12 + 1) as u8,
        elec_cycle: g / 12 + 1,
        global_index: g + 1,
        sin_label: sin_deg(mid),
        cos_label: cos_deg(mid),
    })
}

/// Analytic midpoint label of a slot given its indices.
pub fn vsn_to_label(vsn: u8, elec_cycle: u32, pole_pairs: u32) -> Result<(f64, f64)> {
    if !(1..=12).contains(&vsn) {
        return Err(Error::Domain(format!("vsn {vsn} outside 1-12")));
    }
    if elec_cycle == 0 || elec_cycle > pole_pairs {
        return Err(Error::Domain(format!(
            "elec_cycle {elec_cycle} outside 1-{pole_pairs}"
        )));
    }
    let g = (elec_cycle - 1) * 12 + (vsn as u32 - 1);
    let mid = slot_midpoint_deg(g, pole_pairs);
    Ok((sin_deg(mid), cos_deg(mid)))
}

/// Sine/cosine of a slot's midpoint electrical angle, `(vsn - 0.5) * 30`
/// degrees. These are the regression targets of the position network: the
/// voltage waveform repeats every electrical cycle, so the within-cycle
/// angle is what the network can actually resolve.
pub fn elec_label(vsn: u8) -> Result<(f64, f64)> {
    if !(1..=12).contains(&vsn) {
        return Err(Error::Domain(format!("vsn {vsn} outside 1-12")));
    }
    let mid = (vsn as f64 - 0.5) * 30.0;
    Ok((sin_deg(mid), cos_deg(mid)))
}

/// Per-slot occupancy of a labelled dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelStats {
    /// Example count per global slot (index 0 = slot 1).
    pub counts: Vec<u64>,
    pub total: u64,
}

impl LabelStats {
    /// Number of distinct slots observed.
    pub fn coverage(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }
}

/// One conditioned dataset row paired with its encoder-derived slot label.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabeledSample {
    pub time: f64,
    pub v_xs: [f64; 3],
    pub enc_deg: f64,
    pub speed_rpm: f64,
    pub label: VsnLabel,
}

/// Attach slot labels to every conditioned row using its encoder angle.
pub fn label_dataset(
    rows: &[DatasetRow],
    pole_pairs: u32,
) -> Result<(Vec<LabeledSample>, LabelStats)> {
    let mut out = Vec::with_capacity(rows.len());
    let mut counts = vec![0u64; 12 * pole_pairs as usize];
    for row in rows {
        let label = angle_to_vsn(row.enc_deg, pole_pairs)?;
        counts[label.global_index as usize - 1] += 1;
        out.push(LabeledSample {
            time: row.time,
            v_xs: row.v_xs,
            enc_deg: row.enc_deg,
            speed_rpm: row.speed_rpm,
            label,
        });
    }
    let total = rows.len() as u64;
    Ok((out, LabelStats { counts, total }))
}
