//! Batch files: CSV rows prefixed by a metadata header line.
//!
//! ```text
//! # world=U seed=42 step_length=0.045
//! x,y,theta,action,reward,next_x,next_y,next_theta,terminal
//! 0.5,0.5,0,0,0,0.545,0.5,0,0
//! ```
//!
//! Floats are written in shortest round-trip form, so a saved batch reloads
//! bit-identically. Episode boundaries are reconstructed from the terminal
//! flags (collection resets only at the goal).

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::sim::{Batch, Pose, Transition};
use super::world::World;
use crate::error::{Error, Result};

const COLUMNS: &str = "x,y,theta,action,reward,next_x,next_y,next_theta,terminal";

/// Batch file metadata.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatchHeader {
    pub world: World,
    pub seed: u64,
    pub step_length: f64,
}

pub fn save_batch(batch: &Batch, world: World, step_length: f64, path: &Path) -> Result<()> {
    let as_io = |e: std::io::Error| Error::io(path.display().to_string(), e);
    let mut out = BufWriter::new(File::create(path).map_err(as_io)?);
    writeln!(
        out,
        "# world={} seed={} step_length={}",
        world, batch.seed, step_length
    )
    .map_err(as_io)?;
    writeln!(out, "{COLUMNS}").map_err(as_io)?;
    for t in &batch.transitions {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            t.pose.x,
            t.pose.y,
            t.pose.theta,
            t.action,
            t.reward,
            t.next_pose.x,
            t.next_pose.y,
            t.next_pose.theta,
            u8::from(t.terminal)
        )
        .map_err(as_io)?;
    }
    out.flush().map_err(as_io)
}

pub fn load_batch(path: &Path) -> Result<(Batch, BatchHeader)> {
    let as_io = |e: std::io::Error| Error::io(path.display().to_string(), e);
    let reader = BufReader::new(File::open(path).map_err(as_io)?);
    let mut lines = reader.lines();

    let meta = lines
        .next()
        .ok_or_else(|| Error::Data(format!("{}: empty batch file", path.display())))?
        .map_err(as_io)?;
    let header = parse_header(&meta)
        .ok_or_else(|| Error::Data(format!("{}: malformed header {meta:?}", path.display())))?;

    let columns = lines
        .next()
        .ok_or_else(|| Error::Data(format!("{}: missing column row", path.display())))?
        .map_err(as_io)?;
    if columns != COLUMNS {
        return Err(Error::Data(format!(
            "{}: unexpected columns {columns:?}",
            path.display()
        )));
    }

    let mut transitions = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line.map_err(as_io)?;
        if line.is_empty() {
            continue;
        }
        transitions.push(parse_row(&line).ok_or_else(|| {
            Error::Data(format!("{}: bad transition on line {}", path.display(), i + 3))
        })?);
    }
    if transitions.is_empty() {
        return Err(Error::Data(format!(
            "{}: batch contains no transitions",
            path.display()
        )));
    }

    let episode_boundaries = (1..transitions.len())
        .filter(|&i| transitions[i - 1].terminal)
        .collect();

    Ok((
        Batch {
            transitions,
            episode_boundaries,
            seed: header.seed,
        },
        header,
    ))
}

fn parse_header(line: &str) -> Option<BatchHeader> {
    let rest = line.strip_prefix("# ")?;
    let mut world = None;
    let mut seed = None;
    let mut step_length = None;
    for field in rest.split_whitespace() {
        let (key, value) = field.split_once('=')?;
        match key {
            "world" => world = value.parse::<World>().ok(),
            "seed" => seed = value.parse::<u64>().ok(),
            "step_length" => step_length = value.parse::<f64>().ok(),
            _ => return None,
        }
    }
    Some(BatchHeader {
        world: world?,
        seed: seed?,
        step_length: step_length?,
    })
}

fn parse_row(line: &str) -> Option<Transition> {
    let mut it = line.split(',');
    let mut next_f64 = || it.next()?.parse::<f64>().ok();
    let x = next_f64()?;
    let y = next_f64()?;
    let theta = next_f64()?;
    let action = next_f64()? as usize;
    let reward = next_f64()?;
    let nx = next_f64()?;
    let ny = next_f64()?;
    let ntheta = next_f64()?;
    let terminal = match next_f64()? {
        v if v == 0.0 => false,
        v if v == 1.0 => true,
        _ => return None,
    };
    Some(Transition {
        pose: Pose {
            x,
            y,
            theta,
        },
        action,
        reward,
        next_pose: Pose {
            x: nx,
            y: ny,
            theta: ntheta,
        },
        terminal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::navsim::{collect_random_walk, make_world};

    #[test]
    fn batch_round_trips_bitwise() {
        let world = make_world(World::U);
        let batch = collect_random_walk(&world, 2_000, 13).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("batch.csv");
        save_batch(&batch, World::U, world.step_length(), &path).unwrap();
        let (loaded, header) = load_batch(&path).unwrap();
        assert_eq!(loaded, batch);
        assert_eq!(
            header,
            BatchHeader {
                world: World::U,
                seed: 13,
                step_length: world.step_length()
            }
        );
    }

    #[test]
    fn malformed_files_are_data_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "not a header\n").unwrap();
        assert!(matches!(load_batch(&path), Err(Error::Data(_))));
    }
}
