//! Binary restart files.
//!
//! Layout, all little-endian:
//!
//! | field | type |
//! |---|---|
//! | magic `RFACKPT\0` | 8 bytes |
//! | version (= 1) | u32 |
//! | vertex count `nv`, triangle count `nt` | u64, u64 |
//! | time, step | f64, u64 |
//! | nodal velocity, then bubble velocity | `2nv` f64, `2nt` f64 (x, y interleaved) |
//! | pressure, θ, φ blood, φ tissue | `nv` f64 each |
//! | older θ present flag | u8, then `nv` f64 when set |
//! | Joule source, artificial viscosity | `nt` f64 each |

use std::io::{Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::fem::{CoefficientField, VelocityField};
use crate::mesh::Mesh;
use crate::physics::FieldState;

const MAGIC: &[u8; 8] = b"RFACKPT\0";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("checkpoint i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a checkpoint file")]
    BadMagic,
    #[error("unsupported checkpoint version {0}")]
    Version(u32),
    #[error("checkpoint is for {found_nv} vertices / {found_nt} triangles, mesh has {nv} / {nt}")]
    SizeMismatch {
        nv: usize,
        nt: usize,
        found_nv: usize,
        found_nt: usize,
    },
    #[error("malformed checkpoint: {0}")]
    Malformed(&'static str),
}

/// Everything needed to continue a run bit-for-bit.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub state: FieldState,
    pub theta_older: Option<Vec<f64>>,
    pub joule: CoefficientField,
    pub artificial_viscosity: CoefficientField,
}

struct Reader<'a>(&'a [u8]);

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8], CheckpointError> {
        if self.0.len() < n {
            return Err(CheckpointError::Malformed("truncated"));
        }
        let (head, tail) = self.0.split_at(n);
        self.0 = tail;
        Ok(head)
    }

    fn u64(&mut self) -> Result<u64, CheckpointError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f64(&mut self) -> Result<f64, CheckpointError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>, CheckpointError> {
        (0..n).map(|_| self.f64()).collect()
    }

    fn pairs(&mut self, n: usize) -> Result<Vec<[f64; 2]>, CheckpointError> {
        (0..n).map(|_| Ok([self.f64()?, self.f64()?])).collect()
    }
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Vec<u8> {
        let s = &self.state;
        let nv = s.theta.len();
        let nt = s.velocity.bubble.len();
        let mut out = Vec::with_capacity(64 + 8 * (8 * nv + 4 * nt));
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
        out.extend_from_slice(&(nv as u64).to_le_bytes());
        out.extend_from_slice(&(nt as u64).to_le_bytes());
        out.extend_from_slice(&s.t.to_le_bytes());
        out.extend_from_slice(&(s.step as u64).to_le_bytes());
        let mut put = |v: &[f64]| v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes()));
        put(s.velocity.nodal.as_flattened());
        put(s.velocity.bubble.as_flattened());
        put(&s.pressure);
        put(&s.theta);
        put(&s.phi_blood);
        put(&s.phi_tissue);
        match &self.theta_older {
            Some(old) => {
                out.push(1);
                old.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes()));
            }
            None => out.push(0),
        }
        for f in [&self.joule, &self.artificial_viscosity] {
            f.values().iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes()));
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CheckpointError> {
        let mut r = Reader(bytes);
        if r.take(8)? != MAGIC {
            return Err(CheckpointError::BadMagic);
        }
        let version = u32::from_le_bytes(r.take(4)?.try_into().expect("4 bytes"));
        if version != CHECKPOINT_VERSION {
            return Err(CheckpointError::Version(version));
        }
        let nv = r.u64()? as usize;
        let nt = r.u64()? as usize;
        // guard allocations against corrupt counts
        if nv.saturating_mul(8) > bytes.len() || nt.saturating_mul(8) > bytes.len() {
            return Err(CheckpointError::Malformed("counts exceed file size"));
        }
        let t = r.f64()?;
        let step = r.u64()? as usize;
        let velocity = VelocityField {
            nodal: r.pairs(nv)?,
            bubble: r.pairs(nt)?,
        };
        let pressure = r.f64s(nv)?;
        let theta = r.f64s(nv)?;
        let phi_blood = r.f64s(nv)?;
        let phi_tissue = r.f64s(nv)?;
        let theta_older = match r.take(1)?[0] {
            0 => None,
            1 => Some(r.f64s(nv)?),
            _ => return Err(CheckpointError::Malformed("bad history flag")),
        };
        let joule = CoefficientField::new(r.f64s(nt)?);
        let artificial_viscosity = CoefficientField::new(r.f64s(nt)?);
        if !r.0.is_empty() {
            return Err(CheckpointError::Malformed("trailing bytes"));
        }
        Ok(Self {
            state: FieldState {
                t,
                step,
                velocity,
                pressure,
                theta,
                phi_blood,
                phi_tissue,
            },
            theta_older,
            joule,
            artificial_viscosity,
        })
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<(), CheckpointError> {
        std::fs::File::create(path)?.write_all(&self.to_bytes())?;
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self, CheckpointError> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut bytes)?;
        Self::from_bytes(&bytes)
    }

    pub fn check_sizes(&self, mesh: &Mesh) -> Result<(), CheckpointError> {
        let (nv, nt) = (mesh.num_vertices(), mesh.num_triangles());
        let found_nv = self.state.theta.len();
        let found_nt = self.state.velocity.bubble.len();
        if nv != found_nv || nt != found_nt {
            return Err(CheckpointError::SizeMismatch {
                nv,
                nt,
                found_nv,
                found_nt,
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(history: bool) -> Checkpoint {
        let nv = 4;
        let nt = 2;
        let ramp = |n: usize, s: f64| (0..n).map(|i| s * i as f64 + 0.1).collect::<Vec<_>>();
        Checkpoint {
            state: FieldState {
                t: 0.37,
                step: 37,
                velocity: VelocityField {
                    nodal: (0..nv).map(|i| [i as f64, -(i as f64) / 3.0]).collect(),
                    bubble: (0..nt).map(|i| [1e-3 * i as f64, f64::MIN_POSITIVE]).collect(),
                },
                pressure: ramp(nv, -2.0),
                theta: ramp(nv, 1.5),
                phi_blood: ramp(nv, 0.25),
                phi_tissue: ramp(nv, 0.125),
            },
            theta_older: history.then(|| ramp(nv, 1.25)),
            joule: CoefficientField::new(ramp(nt, 7.0)),
            artificial_viscosity: CoefficientField::new(ramp(nt, 1e-4)),
        }
    }

    #[test]
    fn bytes_round_trip_exactly() {
        for history in [false, true] {
            let c = sample(history);
            assert_eq!(Checkpoint::from_bytes(&c.to_bytes()).unwrap(), c);
        }
    }

    #[test]
    fn rejects_corruption() {
        let mut bytes = sample(true).to_bytes();
        assert!(matches!(Checkpoint::from_bytes(&bytes[..bytes.len() - 3]), Err(CheckpointError::Malformed(_))));
        bytes[8] = 9;
        assert!(matches!(Checkpoint::from_bytes(&bytes), Err(CheckpointError::Version(9))));
        bytes[0] = b'X';
        assert!(matches!(Checkpoint::from_bytes(&bytes), Err(CheckpointError::BadMagic)));
    }
}
