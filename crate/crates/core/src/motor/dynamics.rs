//! Per-phase circuit and mechanical integration for one timestep.
//!
//! Drive model: the inverter applies average-value rails of
//! `+duty*V` / `-duty*V` to the high and low phases of the active pair
//! (symmetric about the measurement reference), the floating phase carries
//! no current, and the conducting loop obeys
//! `2*duty*V = 2*R*i + 2*(L-M)*di/dt + (E_hi - E_lo)`.
//! Electromagnetic torque is `k_e * (sh_hi - sh_lo) * i`, which stays
//! defined at standstill. Speed is clamped non-negative (clockwise runs)
//! and a standing rotor is not back-driven by the load.

use alloc::format;
use alloc::string::ToString;

use super::bemf::trapezoid_shape;
use super::commutation::Phase;
use super::params::MotorParams;
use crate::error::{Error, Result};
use crate::num::{rad_s_to_rpm, rpm_to_rad_s, wrap360};

/// Instantaneous machine state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveState {
    /// Simulation time, seconds; strictly increasing across a run.
    pub time: f64,
    /// Mechanical rotor angle, degrees in `[0, 360)`.
    pub mech_angle: f64,
    /// Electrical rotor angle, degrees in `[0, 360)`; always
    /// `(mech_angle * K_p) mod 360`.
    pub elec_angle: f64,
    /// Mechanical speed, rpm, `>= 0`.
    pub speed_rpm: f64,
    /// Phase currents `[I_A, I_B, I_C]`, amperes.
    pub phase_currents: [f64; 3],
}

impl DriveState {
    pub fn at_rest() -> Self {
        Self {
            time: 0.0,
            mech_angle: 0.0,
            elec_angle: 0.0,
            speed_rpm: 0.0,
            phase_currents: [0.0; 3],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.time.is_finite()
            && self.mech_angle.is_finite()
            && self.elec_angle.is_finite()
            && self.speed_rpm.is_finite()
            && self.phase_currents.iter().all(|c| c.is_finite())
    }
}

/// Inverter command for one step interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateCommand {
    /// Active `(high, low)` phase pair, or `None` with all transistors off.
    pub pair: Option<(Phase, Phase)>,
    /// PWM duty cycle in `[0, 1]`, applied as an average-value rail.
    pub duty: f64,
}

impl GateCommand {
    pub fn floating() -> Self {
        Self {
            pair: None,
            duty: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.duty) || !self.duty.is_finite() {
            return Err(Error::Domain(format!("duty {} outside [0, 1]", self.duty)));
        }
        if let Some((hi, lo)) = self.pair {
            if hi == lo {
                return Err(Error::Domain(
                    "high and low transistors must drive distinct legs".to_string(),
                ));
            }
        }
        Ok(())
    }
}

#[inline]
fn shapes(elec_deg: f64) -> [f64; 3] {
    [
        trapezoid_shape(elec_deg),
        trapezoid_shape(elec_deg - 120.0),
        trapezoid_shape(elec_deg - 240.0),
    ]
}

/// Terminal voltages of the three phases with respect to the supply
/// midpoint, volts. Active phases sit at the applied rails; the floating
/// phase shows its back-EMF plus the motor neutral potential.
pub fn terminal_voltages(
    elec_deg: f64,
    speed_rpm: f64,
    gate: &GateCommand,
    params: &MotorParams,
) -> [f64; 3] {
    let amp = params.bemf_constant * rpm_to_rad_s(speed_rpm);
    let sh = shapes(elec_deg);
    let e = [amp * sh[0], amp * sh[1], amp * sh[2]];
    match gate.pair {
        Some((hi, lo)) => {
            let rail = gate.duty * params.rated_voltage;
            let (hi, lo) = (hi.index(), lo.index());
            let fl = 3 - hi - lo;
            // Neutral from the two conducting KVL equations; resistive and
            // inductive drops cancel in the sum.
            let v_n = -(e[hi] + e[lo]) / 2.0;
            let mut v = [0.0; 3];
            v[hi] = rail;
            v[lo] = -rail;
            v[fl] = e[fl] + v_n;
            v
        }
        None => e,
    }
}

/// Advance the machine by `dt` seconds under a fixed gate command.
pub fn step_dynamics(
    state: &DriveState,
    gate: &GateCommand,
    dt: f64,
    params: &MotorParams,
) -> Result<DriveState> {
    gate.validate()?;
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::Domain(format!("dt {dt} must be > 0")));
    }

    let sh = shapes(state.elec_angle);
    let w = rpm_to_rad_s(state.speed_rpm);
    let ke = params.bemf_constant;

    let (currents, torque) = match gate.pair {
        Some((hi, lo)) => {
            let (hi, lo) = (hi.index(), lo.index());
            // Carry the current of whichever phase stayed in the loop
            // across a commutation; the freshly floating phase snaps to 0.
            let cand_hi = state.phase_currents[hi];
            let cand_lo = -state.phase_currents[lo];
            let i0 = if cand_hi.abs() >= cand_lo.abs() {
                cand_hi
            } else {
                cand_lo
            };

            let loop_v = 2.0 * gate.duty * params.rated_voltage;
            let loop_emf = ke * w * (sh[hi] - sh[lo]);
            let di = (loop_v - 2.0 * params.phase_resistance * i0 - loop_emf)
                / (2.0 * params.series_inductance())
                * dt;
            let i1 = i0 + di;

            let mut c = [0.0; 3];
            c[hi] = i1;
            c[lo] = -i1;
            (c, ke * (sh[hi] - sh[lo]) * i1)
        }
        // No freewheeling path is modelled: open inverter means zero current.
        None => ([0.0; 3], 0.0),
    };

    let drive = torque - params.viscous_friction * w;
    let net = if w > 0.0 {
        drive - params.load_torque
    } else {
        (drive - params.load_torque).max(0.0)
    };
    let w1 = (w + net / params.rotor_inertia * dt).max(0.0);
    let mech = wrap360(state.mech_angle + rad_s_to_rpm(w1) * 6.0 * dt);

    let next = DriveState {
        time: state.time + dt,
        mech_angle: mech,
        elec_angle: wrap360(mech * params.pole_pairs as f64),
        speed_rpm: rad_s_to_rpm(w1),
        phase_currents: currents,
    };
    if !next.is_finite() {
        return Err(Error::SimFault {
            time: next.time,
            detail: format!(
                "non-finite state: speed {} rpm, currents {:?}",
                next.speed_rpm, next.phase_currents
            ),
        });
    }
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::motor::commutation::commutation_step;

    fn slaved_gate(state: &DriveState, duty: f64) -> GateCommand {
        let info = commutation_step(state.elec_angle).unwrap();
        GateCommand {
            pair: Some((info.high, info.low)),
            duty,
        }
    }

    #[test]
    fn equilibrium_is_preserved() {
        let p = MotorParams::maxon_ec45();
        let s0 = DriveState::at_rest();
        let gate = GateCommand {
            pair: Some((Phase::A, Phase::B)),
            duty: 0.0,
        };
        let s1 = step_dynamics(&s0, &gate, 1e-6, &p).unwrap();
        assert_eq!(s1.mech_angle, 0.0);
        assert_eq!(s1.speed_rpm, 0.0);
        assert_eq!(s1.phase_currents, [0.0; 3]);
        assert!(s1.time > s0.time);
    }

    #[test]
    fn load_does_not_back_drive_a_standing_rotor() {
        let p = MotorParams::maxon_ec45();
        let s0 = DriveState::at_rest();
        let s1 = step_dynamics(&s0, &GateCommand::floating(), 1e-6, &p).unwrap();
        assert_eq!(s1.speed_rpm, 0.0);
    }

    #[test]
    fn no_load_speed_approaches_v_over_ke() {
        let mut p = MotorParams::maxon_ec45();
        p.load_torque = 0.0;
        let mut s = DriveState::at_rest();
        let dt = 1e-6;
        // ~0.5 s is ~35 mechanical time constants.
        for _ in 0..500_000 {
            let gate = slaved_gate(&s, 1.0);
            s = step_dynamics(&s, &gate, dt, &p).unwrap();
        }
        let target = rad_s_to_rpm(p.no_load_speed());
        let rel = (s.speed_rpm - target).abs() / target;
        assert!(
            rel < 0.02,
            "speed {} vs {} ({:.4})",
            s.speed_rpm,
            target,
            rel
        );
    }

    #[test]
    fn electrical_period_is_mechanical_over_pole_pairs() {
        // Coasting rotor with enormous inertia: speed is effectively
        // constant, so cycle periods come straight from the kinematics.
        let mut p = MotorParams::maxon_ec45();
        p.rotor_inertia = 1e9;
        p.load_torque = 0.0;
        let dt = 1e-6;
        let mut s = DriveState::at_rest();
        s.speed_rpm = 1500.0; // T_m = 40 ms, expected T_e = 5 ms
        let mut elec_wraps = 0u32;
        let mut first_wrap_t = None;
        let mut last_wrap_t = 0.0;
        let mut prev_elec = s.elec_angle;
        while s.time < 0.045 {
            s = step_dynamics(&s, &GateCommand::floating(), dt, &p).unwrap();
            if s.elec_angle < prev_elec {
                elec_wraps += 1;
                if first_wrap_t.is_none() {
                    first_wrap_t = Some(s.time);
                }
                last_wrap_t = s.time;
            }
            prev_elec = s.elec_angle;
        }
        let t_e = (last_wrap_t - first_wrap_t.unwrap()) / (elec_wraps - 1) as f64;
        assert!((t_e - 0.005).abs() <= dt, "T_e {t_e}");
        // T_m = K_p * T_e within one substep.
        assert!((8.0 * t_e - 0.040).abs() <= 8.0 * dt);
    }

    #[test]
    fn commutation_carries_the_shared_phase_current() {
        let p = MotorParams::maxon_ec45();
        let mut s = DriveState::at_rest();
        s.phase_currents = [2.0, -2.0, 0.0]; // conducting pair (A, B)
                                             // Switch to (A, C): phase A stays, so the loop should start near 2 A.
        let gate = GateCommand {
            pair: Some((Phase::A, Phase::C)),
            duty: 0.5,
        };
        let s1 = step_dynamics(&s, &gate, 1e-6, &p).unwrap();
        assert!((s1.phase_currents[0] - 2.0).abs() < 0.1);
        assert_eq!(s1.phase_currents[1], 0.0);
        assert!((s1.phase_currents[0] + s1.phase_currents[2]).abs() < 1e-12);
    }

    #[test]
    fn invalid_gate_or_dt_rejected() {
        let p = MotorParams::maxon_ec45();
        let s = DriveState::at_rest();
        let same_leg = GateCommand {
            pair: Some((Phase::A, Phase::A)),
            duty: 0.5,
        };
        assert!(step_dynamics(&s, &same_leg, 1e-6, &p).is_err());
        let bad_duty = GateCommand {
            pair: Some((Phase::A, Phase::B)),
            duty: 1.5,
        };
        assert!(step_dynamics(&s, &bad_duty, 1e-6, &p).is_err());
        let ok = GateCommand {
            pair: Some((Phase::A, Phase::B)),
            duty: 0.5,
        };
        assert!(step_dynamics(&s, &ok, 0.0, &p).is_err());
    }

    #[test]
    fn non_finite_state_is_a_sim_fault() {
        let p = MotorParams::maxon_ec45();
        let mut s = DriveState::at_rest();
        s.phase_currents = [f64::MAX, -f64::MAX, 0.0];
        let gate = GateCommand {
            pair: Some((Phase::A, Phase::B)),
            duty: 1.0,
        };
        // Huge current makes the explicit update overflow to infinity.
        let r = step_dynamics(&s, &gate, 1e6, &p);
        match r {
            Err(Error::SimFault { .. }) => {}
            other => panic!("expected SimFault, got {other:?}"),
        }
    }

    #[test]
    fn terminal_voltages_show_rails_and_floating_bemf() {
        let p = MotorParams::maxon_ec45();
        let gate = GateCommand {
            pair: Some((Phase::A, Phase::B)),
            duty: 0.5,
        };
        // 30 deg electrical: flats for A (+) and B (-), C ramping.
        let v = terminal_voltages(30.0, 850.0, &gate, &p);
        assert_eq!(v[0], 0.5 * p.rated_voltage);
        assert_eq!(v[1], -0.5 * p.rated_voltage);
        // E_A + E_B = 0 on opposing flats, so the neutral sits at zero and
        // the floating terminal reads its own back-EMF.
        let e = super::super::bemf::bemf(30.0, 850.0, &p);
        assert!((v[2] - e[2]).abs() < 1e-12);
    }
}
