//! Binary field dumps.
//!
//! Layout, all little-endian:
//!
//! | offset | size | content                                  |
//! |--------|------|------------------------------------------|
//! | 0      | 4    | magic `PSFD`                             |
//! | 4      | 1    | format version (1)                       |
//! | 5      | 3    | reserved, zero                           |
//! | 8      | 8    | grid min (f64)                           |
//! | 16     | 8    | grid max (f64), inclusive last point     |
//! | 24     | 8    | point count n (u64)                      |
//! | 32     | 8    | z in cm (f64)                            |
//! | 40     | 4    | component count c (u32)                  |
//! | 44     | 16nc | per component, n pairs of (re, im) f64   |

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::spectral::UniformGrid;
use crate::C64;

pub const DUMP_MAGIC: [u8; 4] = *b"PSFD";
pub const DUMP_VERSION: u8 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct FieldDump {
    pub grid: UniformGrid,
    pub z: f64,
    pub components: Vec<Vec<C64>>,
}

impl FieldDump {
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        for c in &self.components {
            if c.len() != self.grid.n {
                return Err(Error::Shape(format!("component of length {} on a {}-point grid", c.len(), self.grid.n)));
            }
        }
        let mut buf = Vec::with_capacity(44 + 16 * self.grid.n * self.components.len());
        buf.extend_from_slice(&DUMP_MAGIC);
        buf.push(DUMP_VERSION);
        buf.extend_from_slice(&[0u8; 3]);
        buf.extend_from_slice(&self.grid.min.to_le_bytes());
        buf.extend_from_slice(&self.grid.max.to_le_bytes());
        buf.extend_from_slice(&(self.grid.n as u64).to_le_bytes());
        buf.extend_from_slice(&self.z.to_le_bytes());
        buf.extend_from_slice(&(self.components.len() as u32).to_le_bytes());
        for c in &self.components {
            for v in c {
                buf.extend_from_slice(&v.re.to_le_bytes());
                buf.extend_from_slice(&v.im.to_le_bytes());
            }
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut head = [0u8; 44];
        r.read_exact(&mut head)?;
        if head[..4] != DUMP_MAGIC {
            return Err(Error::Io("not a field dump (bad magic)".into()));
        }
        if head[4] != DUMP_VERSION {
            return Err(Error::Io(format!("unsupported dump version {}", head[4])));
        }
        let f64_at = |o: usize| f64::from_le_bytes(head[o..o + 8].try_into().unwrap());
        let n = u64::from_le_bytes(head[24..32].try_into().unwrap()) as usize;
        let count = u32::from_le_bytes(head[40..44].try_into().unwrap()) as usize;
        let grid = UniformGrid::new(f64_at(8), f64_at(16), n)?;
        let mut body = vec![0u8; 16 * n * count];
        r.read_exact(&mut body)?;
        let val = |o: usize| f64::from_le_bytes(body[o..o + 8].try_into().unwrap());
        let components = (0..count)
            .map(|c| {
                (0..n)
                    .map(|j| {
                        let o = 16 * (c * n + j);
                        C64::new(val(o), val(o + 8))
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            grid,
            z: f64_at(32),
            components,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let grid = UniformGrid::new(-2.0, 2.0, 5).unwrap();
        let d = FieldDump {
            grid,
            z: 0.125,
            components: vec![
                (0..5).map(|i| C64::new(i as f64, -0.5 * i as f64)).collect(),
                (0..5).map(|i| C64::new(1e-300 * i as f64, f64::MAX)).collect(),
            ],
        };
        let mut bytes = Vec::new();
        d.write_to(&mut bytes).unwrap();
        assert_eq!(bytes.len(), 44 + 16 * 10);
        assert_eq!(&bytes[..5], b"PSFD\x01");
        assert_eq!(FieldDump::read_from(bytes.as_slice()).unwrap(), d);
        bytes[4] = 9;
        assert!(FieldDump::read_from(bytes.as_slice()).is_err());
    }
}
