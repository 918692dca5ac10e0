//! Line-oriented bath text format.
//!
//! ```text
//! # spinbath bath v1
//! # seed = 7
//! # columns: x_A y_A z_A species gamma_Hz_per_T Axx_Hz Axy_Hz Axz_Hz Ayx_Hz Ayy_Hz Ayz_Hz Azx_Hz Azy_Hz Azz_Hz paramagnetic active
//! 1.5395 0.888 -2.52 29Si -8465000 ... 0 1
//! ```
//!
//! Floats are written in Rust's shortest round-trip form, so reading a file
//! back yields the identical bath.

use std::io::{BufRead, Write};

use nalgebra::{Matrix3, Vector3};

use super::hyperfine::HyperfineTensor;
use super::sample::{Bath, BathSpin};
use crate::error::{Error, Result};
use crate::spin::SpinSpecies;

pub const BATH_HEADER: &str = "# spinbath bath v1";
pub const BATH_COLUMNS: &str = "# columns: x_A y_A z_A species gamma_Hz_per_T Axx_Hz Axy_Hz Axz_Hz Ayx_Hz Ayy_Hz Ayz_Hz Azx_Hz Azy_Hz Azz_Hz paramagnetic active";

pub fn write_bath<W: Write>(bath: &Bath, mut out: W) -> Result<()> {
    writeln!(out, "{BATH_HEADER}")?;
    writeln!(out, "# seed = {}", bath.seed)?;
    writeln!(out, "{BATH_COLUMNS}")?;
    for s in &bath.spins {
        let p = &s.position;
        write!(
            out,
            "{} {} {} {} {}",
            p.x, p.y, p.z, s.species.name, s.species.gyromagnetic_ratio
        )?;
        for i in 0..3 {
            for j in 0..3 {
                write!(out, " {}", s.hyperfine.matrix[(i, j)])?;
            }
        }
        writeln!(out, " {} {}", s.paramagnetic as u8, s.active as u8)?;
    }
    Ok(())
}

pub fn bath_to_string(bath: &Bath) -> String {
    let mut buf = Vec::new();
    write_bath(bath, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("bath text is ASCII")
}

fn parse_f64(tok: &str, line: usize) -> Result<f64> {
    tok.parse()
        .map_err(|_| Error::Parse(format!("line {line}: bad number `{tok}`")))
}

fn parse_flag(tok: &str, line: usize) -> Result<bool> {
    match tok {
        "0" => Ok(false),
        "1" => Ok(true),
        _ => Err(Error::Parse(format!("line {line}: flag must be 0 or 1, got `{tok}`"))),
    }
}

pub fn read_bath<R: BufRead>(input: R) -> Result<Bath> {
    let mut seed = 0;
    let mut spins = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            if let Some(v) = comment.trim().strip_prefix("seed =") {
                seed = v
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("line {lineno}: bad seed")))?;
            }
            continue;
        }
        let toks: Vec<&str> = trimmed.split_whitespace().collect();
        if toks.len() != 16 {
            return Err(Error::Parse(format!(
                "line {lineno}: expected 16 columns, found {}",
                toks.len()
            )));
        }
        let position = Vector3::new(
            parse_f64(toks[0], lineno)?,
            parse_f64(toks[1], lineno)?,
            parse_f64(toks[2], lineno)?,
        );
        let mut species = SpinSpecies::by_name(toks[3])?;
        species.gyromagnetic_ratio = parse_f64(toks[4], lineno)?;
        let mut m = Matrix3::zeros();
        for k in 0..9 {
            m[(k / 3, k % 3)] = parse_f64(toks[5 + k], lineno)?;
        }
        spins.push(BathSpin {
            position,
            species,
            hyperfine: HyperfineTensor::new(m),
            paramagnetic: parse_flag(toks[14], lineno)?,
            active: parse_flag(toks[15], lineno)?,
        });
    }
    Ok(Bath::new(spins, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::lattice::{generate_lattice, LatticeConstants};
    use crate::bath::sample::{sample_bath, BathConfig};

    #[test]
    fn round_trip_is_exact() {
        let sites = generate_lattice([4, 4, 2], &LatticeConstants::default()).unwrap();
        let cfg = BathConfig {
            si29_abundance: 0.3,
            c13_abundance: 0.2,
            impurity_density_per_cm3: 1e20,
            bath_radius_angstrom: 40.0,
            rng_seed: 9,
            ..BathConfig::default()
        };
        let mut bath = sample_bath(&sites, &cfg).unwrap();
        bath.spins[0].active = false;
        let text = bath_to_string(&bath);
        assert!(text.starts_with(BATH_HEADER));
        let back = read_bath(text.as_bytes()).unwrap();
        assert_eq!(back, bath);
    }

    #[test]
    fn malformed_lines_rejected() {
        assert!(read_bath("1 2 3\n".as_bytes()).is_err());
        let bad_species = "0 0 5 Xx 1 0 0 0 0 0 0 0 0 0 0 1\n";
        assert!(read_bath(bad_species.as_bytes()).is_err());
        let bad_flag = "0 0 5 29Si 1 0 0 0 0 0 0 0 0 0 2 1\n";
        assert!(read_bath(bad_flag.as_bytes()).is_err());
    }
}
