//! Line-oriented gate scripts.
//!
//! ```text
//! # CNOT, control 0, target 1
//! ions 2
//! init 10
//! expect 11
//! V 1 pi/2 pi/2  0-1 0
//! U 0 pi     0   0-1 -1
//! ```
//!
//! Header directives (`ions`, `nmax`, `init`, `expect`, `area_error`) come before
//! the first pulse. A pulse line is `V|U ion theta phi transition sideband`, with
//! `transition` one of `0-1` / `0-aux` and `sideband` one of `-1`, `0`, `+1`.
//! Angles accept plain numbers or multiples of pi (`pi`, `2pi`, `pi/2`, `-3pi/4`).
//! State labels give one symbol per ion: `0`, `1`, `a` (aux), `+` / `-`
//! (`(|0⟩ ± |1⟩)/√2`).

use num_complex::Complex64;

use crate::dynamics::{PulseKind, PulseSpec, RegisterState, Sideband, Transition};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IonLabel {
    Zero,
    One,
    Aux,
    Plus,
    Minus,
}

impl IonLabel {
    fn parse(c: char) -> Option<Self> {
        Some(match c {
            '0' => IonLabel::Zero,
            '1' => IonLabel::One,
            'a' => IonLabel::Aux,
            '+' => IonLabel::Plus,
            '-' => IonLabel::Minus,
            _ => return None,
        })
    }

    fn amplitudes(self) -> [Complex64; 3] {
        let z = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let r = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        match self {
            IonLabel::Zero => [one, z, z],
            IonLabel::One => [z, one, z],
            IonLabel::Aux => [z, z, one],
            IonLabel::Plus => [r, r, z],
            IonLabel::Minus => [r, -r, z],
        }
    }

    fn symbol(self) -> char {
        match self {
            IonLabel::Zero => '0',
            IonLabel::One => '1',
            IonLabel::Aux => 'a',
            IonLabel::Plus => '+',
            IonLabel::Minus => '-',
        }
    }
}

pub fn label_string(labels: &[IonLabel]) -> String {
    labels.iter().map(|l| l.symbol()).collect()
}

/// Product state described by a label, motional ground state.
pub fn product_state(labels: &[IonLabel], n_max: usize) -> Result<RegisterState> {
    let ions: Vec<[Complex64; 3]> = labels.iter().map(|l| l.amplitudes()).collect();
    RegisterState::product(&ions, 0, n_max)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScriptedPulse {
    pub line: usize,
    pub pulse: PulseSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateScript {
    pub n_ions: usize,
    pub n_max: Option<usize>,
    pub init: Vec<IonLabel>,
    pub expect: Option<Vec<IonLabel>>,
    /// Fractional area error applied to every pulse.
    pub area_error: f64,
    pub pulses: Vec<ScriptedPulse>,
}

/// Parses `pi`, `2pi`, `pi/2`, `-3pi/4`, `1.5707963`.
pub fn parse_angle(token: &str) -> Option<f64> {
    let (sign, body) = match token.strip_prefix('-') {
        Some(rest) => (-1.0, rest),
        None => (1.0, token.strip_prefix('+').unwrap_or(token)),
    };
    let Some(pos) = body.find("pi") else {
        return body.parse::<f64>().ok().filter(|x| x.is_finite()).map(|x| sign * x);
    };
    let coef = match body[..pos].trim_end_matches('*') {
        "" => 1.0,
        c => c.parse::<f64>().ok()?,
    };
    let den = match &body[pos + 2..] {
        "" => 1.0,
        rest => rest.strip_prefix('/')?.parse::<f64>().ok().filter(|d| *d != 0.0)?,
    };
    Some(sign * coef * std::f64::consts::PI / den)
}

fn parse_labels(s: &str) -> Option<Vec<IonLabel>> {
    let labels: Option<Vec<_>> = s.chars().map(IonLabel::parse).collect();
    labels.filter(|l| !l.is_empty())
}

pub fn parse_script(text: &str) -> Result<GateScript> {
    let mut n_ions: Option<usize> = None;
    let mut n_max = None;
    let mut init = None;
    let mut expect = None;
    let mut area_error = 0.0;
    let mut pulses: Vec<ScriptedPulse> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |message: String| Error::Script { line, message };
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        let head = tokens[0];
        if matches!(head, "V" | "U") {
            if tokens.len() != 6 {
                return Err(err(format!("pulse needs 6 fields `V|U ion theta phi transition sideband`, got {}", tokens.len())));
            }
            let ion: usize = tokens[1]
                .parse()
                .map_err(|_| err(format!("bad ion index `{}`", tokens[1])))?;
            let theta = parse_angle(tokens[2]).ok_or_else(|| err(format!("bad angle `{}`", tokens[2])))?;
            let phi = parse_angle(tokens[3]).ok_or_else(|| err(format!("bad phase `{}`", tokens[3])))?;
            let transition = match tokens[4] {
                "0-1" | "01" => Transition::ZeroOne,
                "0-aux" | "0-a" | "0a" => Transition::ZeroAux,
                t => return Err(err(format!("unknown transition `{t}` (0-1 or 0-aux)"))),
            };
            let offset: i32 = tokens[5]
                .parse()
                .map_err(|_| err(format!("bad sideband `{}`", tokens[5])))?;
            let sideband =
                Sideband::from_offset(offset).ok_or_else(|| err(format!("sideband must be -1, 0 or +1, got {offset}")))?;
            let kind = if head == "V" { PulseKind::V } else { PulseKind::U };
            let pulse = PulseSpec {
                kind,
                ion,
                theta,
                phase: crate::dynamics::OpticalPhase::Single(phi),
                transition,
                sideband,
            };
            pulse
                .validate(n_ions.or(init.as_ref().map(Vec::len)).unwrap_or(usize::MAX))
                .map_err(|e| err(e.to_string()))?;
            pulses.push(ScriptedPulse { line, pulse });
            continue;
        }
        if !pulses.is_empty() {
            return Err(err(format!("directive `{head}` after the first pulse")));
        }
        if tokens.len() != 2 {
            return Err(err(format!("directive `{head}` takes one value")));
        }
        let value = tokens[1];
        match head {
            "ions" => {
                let n: usize = value.parse().map_err(|_| err(format!("bad ion count `{value}`")))?;
                if n == 0 {
                    return Err(err("ion count must be >= 1".into()));
                }
                n_ions = Some(n);
            }
            "nmax" => {
                let n: usize = value.parse().map_err(|_| err(format!("bad nmax `{value}`")))?;
                if n < 2 {
                    return Err(err("nmax must be >= 2".into()));
                }
                n_max = Some(n);
            }
            "init" => init = Some(parse_labels(value).ok_or_else(|| err(format!("bad state label `{value}`")))?),
            "expect" => expect = Some(parse_labels(value).ok_or_else(|| err(format!("bad state label `{value}`")))?),
            "area_error" => {
                let x: f64 = value.parse().map_err(|_| err(format!("bad area error `{value}`")))?;
                if !(x.abs() < 1.0) {
                    return Err(err("area error must satisfy |x| < 1".into()));
                }
                area_error = x;
            }
            other => return Err(err(format!("unknown directive `{other}`"))),
        }
    }

    let n_ions = match (n_ions, &init) {
        (Some(n), _) => n,
        (None, Some(labels)) => labels.len(),
        (None, None) => 1,
    };
    let init = init.unwrap_or_else(|| vec![IonLabel::Zero; n_ions]);
    for (name, labels) in [("init", Some(&init)), ("expect", expect.as_ref())] {
        if let Some(labels) = labels {
            if labels.len() != n_ions {
                return Err(Error::Script {
                    line: 0,
                    message: format!("`{name}` has {} ions, script declares {n_ions}", labels.len()),
                });
            }
        }
    }
    if let Some(p) = pulses.iter().find(|p| p.pulse.ion >= n_ions) {
        return Err(Error::Script {
            line: p.line,
            message: format!("ion {} out of range for {n_ions} ions", p.pulse.ion),
        });
    }
    Ok(GateScript {
        n_ions,
        n_max,
        init,
        expect,
        area_error,
        pulses,
    })
}

/// Inverse of the pulse-line parser.
pub fn format_pulse(p: &PulseSpec) -> String {
    let kind = match p.kind {
        PulseKind::V => "V",
        PulseKind::U => "U",
    };
    let transition = match p.transition {
        Transition::ZeroOne => "0-1",
        Transition::ZeroAux => "0-aux",
    };
    let sideband = match p.sideband {
        Sideband::Red => "-1",
        Sideband::Carrier => "0",
        Sideband::Blue => "+1",
    };
    format!("{kind} {} {:?} {:?} {transition} {sideband}", p.ion, p.theta, p.phi())
}
