//! Trace records and the binary trace file format.
//!
//! Layout (all little-endian):
//!
//! | offset | size | field                          |
//! |--------|------|--------------------------------|
//! | 0      | 8    | magic `SQZTRACE`               |
//! | 8      | 4    | format version (u32)           |
//! | 12     | 4    | header length, 64 (u32)        |
//! | 16     | 8    | samples per frame (u64)        |
//! | 24     | 8    | frames (u64)                   |
//! | 32     | 8    | sample interval, fs (u64)      |
//! | 40     | 8    | LO phase, µrad (i64)           |
//! | 48     | 8    | master seed (u64)              |
//! | 56     | 8    | reserved, zero                 |
//!
//! followed by `frames × samples_per_frame` f64 samples, frame-major.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::SignalError;

pub const TRACE_MAGIC: &[u8; 8] = b"SQZTRACE";
pub const TRACE_FORMAT_VERSION: u32 = 1;
pub const TRACE_HEADER_LEN: usize = 64;

/// One sampled frame of homodyne output in shot-noise units.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub samples: Vec<f64>,
    /// Seconds.
    pub sample_interval: f64,
    /// LO phase the frame was taken at, radians.
    pub theta: f64,
    pub seed: u64,
    pub frame_index: u64,
}

impl TraceRecord {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceHeader {
    pub version: u32,
    pub samples_per_frame: u64,
    pub frames: u64,
    pub sample_interval_fs: u64,
    pub theta_urad: i64,
    pub seed: u64,
}

impl TraceHeader {
    pub fn new(samples_per_frame: usize, frames: usize, sample_interval: f64, theta: f64, seed: u64) -> Self {
        Self {
            version: TRACE_FORMAT_VERSION,
            samples_per_frame: samples_per_frame as u64,
            frames: frames as u64,
            sample_interval_fs: (sample_interval * 1e15).round() as u64,
            theta_urad: (theta * 1e6).round() as i64,
            seed,
        }
    }

    pub fn sample_interval(&self) -> f64 {
        self.sample_interval_fs as f64 * 1e-15
    }

    pub fn theta(&self) -> f64 {
        self.theta_urad as f64 * 1e-6
    }

    pub fn to_bytes(&self) -> [u8; TRACE_HEADER_LEN] {
        let mut b = [0u8; TRACE_HEADER_LEN];
        b[0..8].copy_from_slice(TRACE_MAGIC);
        b[8..12].copy_from_slice(&self.version.to_le_bytes());
        b[12..16].copy_from_slice(&(TRACE_HEADER_LEN as u32).to_le_bytes());
        b[16..24].copy_from_slice(&self.samples_per_frame.to_le_bytes());
        b[24..32].copy_from_slice(&self.frames.to_le_bytes());
        b[32..40].copy_from_slice(&self.sample_interval_fs.to_le_bytes());
        b[40..48].copy_from_slice(&self.theta_urad.to_le_bytes());
        b[48..56].copy_from_slice(&self.seed.to_le_bytes());
        b
    }

    pub fn from_bytes(b: &[u8; TRACE_HEADER_LEN]) -> Result<Self, SignalError> {
        if &b[0..8] != TRACE_MAGIC {
            return Err(SignalError::Format("bad magic".into()));
        }
        let u32_at = |i: usize| u32::from_le_bytes(b[i..i + 4].try_into().unwrap());
        let u64_at = |i: usize| u64::from_le_bytes(b[i..i + 8].try_into().unwrap());
        let version = u32_at(8);
        if version != TRACE_FORMAT_VERSION {
            return Err(SignalError::Format(format!("unsupported version {version}")));
        }
        if u32_at(12) as usize != TRACE_HEADER_LEN {
            return Err(SignalError::Format("unexpected header length".into()));
        }
        let header = Self {
            version,
            samples_per_frame: u64_at(16),
            frames: u64_at(24),
            sample_interval_fs: u64_at(32),
            theta_urad: i64::from_le_bytes(b[40..48].try_into().unwrap()),
            seed: u64_at(48),
        };
        if header.samples_per_frame == 0 || header.sample_interval_fs == 0 {
            return Err(SignalError::Format("zero frame length or sample interval".into()));
        }
        Ok(header)
    }
}

/// Streams frames into a trace file; the frame count is fixed by the header.
pub struct TraceWriter<W: Write> {
    out: W,
    header: TraceHeader,
    written: u64,
}

impl TraceWriter<BufWriter<File>> {
    pub fn create(path: &Path, header: TraceHeader) -> Result<Self, SignalError> {
        Self::new(BufWriter::new(File::create(path)?), header)
    }
}

impl<W: Write> TraceWriter<W> {
    pub fn new(mut out: W, header: TraceHeader) -> Result<Self, SignalError> {
        out.write_all(&header.to_bytes())?;
        Ok(Self {
            out,
            header,
            written: 0,
        })
    }

    pub fn write_frame(&mut self, samples: &[f64]) -> Result<(), SignalError> {
        if samples.len() as u64 != self.header.samples_per_frame {
            return Err(SignalError::Format(format!(
                "frame has {} samples, header declares {}",
                samples.len(),
                self.header.samples_per_frame
            )));
        }
        if self.written == self.header.frames {
            return Err(SignalError::Format("more frames than declared".into()));
        }
        let mut buf = Vec::with_capacity(samples.len() * 8);
        for s in samples {
            buf.extend_from_slice(&s.to_le_bytes());
        }
        self.out.write_all(&buf)?;
        self.written += 1;
        Ok(())
    }

    pub fn finish(mut self) -> Result<W, SignalError> {
        if self.written != self.header.frames {
            return Err(SignalError::Format(format!(
                "wrote {} frames, header declares {}",
                self.written, self.header.frames
            )));
        }
        self.out.flush()?;
        Ok(self.out)
    }
}

/// Reads frames one at a time.
pub struct TraceReader<R: Read> {
    input: R,
    header: TraceHeader,
    next: u64,
}

impl TraceReader<BufReader<File>> {
    pub fn open(path: &Path) -> Result<Self, SignalError> {
        Self::new(BufReader::new(File::open(path)?))
    }
}

impl<R: Read> TraceReader<R> {
    pub fn new(mut input: R) -> Result<Self, SignalError> {
        let mut b = [0u8; TRACE_HEADER_LEN];
        input.read_exact(&mut b)?;
        let header = TraceHeader::from_bytes(&b)?;
        Ok(Self {
            input,
            header,
            next: 0,
        })
    }

    pub fn header(&self) -> &TraceHeader {
        &self.header
    }

    pub fn read_frame(&mut self) -> Result<Option<TraceRecord>, SignalError> {
        if self.next == self.header.frames {
            return Ok(None);
        }
        let n = self.header.samples_per_frame as usize;
        let mut buf = vec![0u8; n * 8];
        self.input.read_exact(&mut buf).map_err(|e| {
            if e.kind() == std::io::ErrorKind::UnexpectedEof {
                SignalError::Format(format!("file truncated in frame {}", self.next))
            } else {
                SignalError::Io(e)
            }
        })?;
        let samples = buf
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let rec = TraceRecord {
            samples,
            sample_interval: self.header.sample_interval(),
            theta: self.header.theta(),
            seed: self.header.seed,
            frame_index: self.next,
        };
        self.next += 1;
        Ok(Some(rec))
    }

    /// Reads up to `max` further frames.
    pub fn read_chunk(&mut self, max: usize) -> Result<Vec<TraceRecord>, SignalError> {
        let mut out = Vec::with_capacity(max);
        while out.len() < max {
            match self.read_frame()? {
                Some(f) => out.push(f),
                None => break,
            }
        }
        Ok(out)
    }
}

pub fn write_trace_file(path: &Path, header: TraceHeader, frames: &[TraceRecord]) -> Result<(), SignalError> {
    let mut w = TraceWriter::create(path, header)?;
    for f in frames {
        w.write_frame(&f.samples)?;
    }
    w.finish()?;
    Ok(())
}

pub fn read_trace_file(path: &Path) -> Result<(TraceHeader, Vec<TraceRecord>), SignalError> {
    let mut r = TraceReader::open(path)?;
    let header = *r.header();
    let frames = r.read_chunk(header.frames as usize)?;
    Ok((header, frames))
}

/// CSV export (`frame,index,time_s,value`) for small frame sets.
pub fn write_trace_csv<W: Write>(out: W, frames: &[TraceRecord]) -> Result<(), SignalError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["frame", "index", "time_s", "value"])?;
    for f in frames {
        for (i, v) in f.samples.iter().enumerate() {
            w.write_record(&[
                f.frame_index.to_string(),
                i.to_string(),
                format!("{:e}", i as f64 * f.sample_interval),
                format!("{v:e}"),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
