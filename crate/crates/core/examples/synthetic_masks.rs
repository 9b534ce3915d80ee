//! Writes a 25-class set of synthetic silhouettes, alternating PGM and 0/1
//! text grids.
//!
//!     cargo run --example synthetic_masks -- fixtures/masks

use std::f64::consts::PI;
use std::path::PathBuf;

use assoc_bench::mask::{shapes, Mask};
use assoc_bench::Result;

const SIZE: usize = 64;

fn poly(id: &str, pts: &[(f64, f64)]) -> Result<Mask> {
    shapes::polygon(id, SIZE, SIZE, pts)
}

fn curve(id: &str, steps: usize, f: impl Fn(f64) -> (f64, f64)) -> Result<Mask> {
    let pts: Vec<(f64, f64)> = (0..steps).map(|i| f(2.0 * PI * i as f64 / steps as f64)).collect();
    poly(id, &pts)
}

fn catalogue() -> Result<Vec<Mask>> {
    let c = SIZE as f64 / 2.0;
    Ok(vec![
        shapes::disc("apple", SIZE, c, c, 20.0)?,
        Mask::from_fn("banana", SIZE, SIZE, |r, col| {
            let (y, x) = (r as f64 + 0.5, col as f64 + 0.5);
            let outer = (y - 20.0).powi(2) + (x - c).powi(2) <= 28.0f64.powi(2);
            let inner = (y - 12.0).powi(2) + (x - c).powi(2) <= 28.0f64.powi(2);
            outer && !inner && y > 20.0
        })?,
        poly("bell", &[(8.0, 28.0), (8.0, 36.0), (20.0, 42.0), (44.0, 46.0), (50.0, 54.0), (50.0, 10.0), (44.0, 18.0), (20.0, 22.0)])?,
        poly("bottle", &[(6.0, 28.0), (6.0, 36.0), (18.0, 36.0), (24.0, 42.0), (58.0, 42.0), (58.0, 22.0), (24.0, 22.0), (18.0, 28.0)])?,
        poly("butterfly", &[(10.0, 8.0), (32.0, 32.0), (10.0, 56.0), (54.0, 56.0), (32.0, 32.0), (54.0, 8.0)])?,
        poly("cat", &[(52.0, 12.0), (20.0, 12.0), (8.0, 16.0), (16.0, 24.0), (16.0, 40.0), (8.0, 48.0), (20.0, 52.0), (52.0, 52.0)])?,
        poly("crown", &[(48.0, 10.0), (14.0, 10.0), (28.0, 20.0), (12.0, 32.0), (28.0, 44.0), (14.0, 54.0), (48.0, 54.0)])?,
        poly("cup", &[(14.0, 12.0), (14.0, 48.0), (50.0, 42.0), (50.0, 18.0)])?,
        shapes::ellipse("eye", SIZE, SIZE, c, c, 9.0, 26.0, 0.0)?,
        poly("fish", &[(32.0, 4.0), (20.0, 16.0), (22.0, 40.0), (14.0, 58.0), (32.0, 48.0), (50.0, 58.0), (42.0, 40.0), (44.0, 16.0)])?,
        curve("guitar", 96, |t| {
            let r = 14.0 + 6.0 * (2.0 * t).cos().abs();
            (c + 1.6 * r * t.cos(), c + 0.8 * r * t.sin())
        })?,
        poly("hat", &[(44.0, 4.0), (36.0, 16.0), (12.0, 20.0), (12.0, 44.0), (36.0, 48.0), (44.0, 60.0)])?,
        curve("heart", 120, |t| {
            let x = 16.0 * t.sin().powi(3);
            let y = 13.0 * t.cos() - 5.0 * (2.0 * t).cos() - 2.0 * (3.0 * t).cos() - (4.0 * t).cos();
            (c - 1.6 * y, c + 1.6 * x)
        })?,
        poly("house", &[(8.0, 32.0), (28.0, 10.0), (56.0, 10.0), (56.0, 54.0), (28.0, 54.0)])?,
        poly("key", &[(10.0, 6.0), (10.0, 26.0), (28.0, 26.0), (28.0, 58.0), (36.0, 58.0), (36.0, 50.0), (42.0, 50.0), (42.0, 26.0), (54.0, 26.0), (54.0, 6.0)])?,
        shapes::ellipse("leaf", SIZE, SIZE, c, c, 10.0, 27.0, PI / 4.0)?,
        Mask::from_fn("moon", SIZE, SIZE, |r, col| {
            let (y, x) = (r as f64 + 0.5, col as f64 + 0.5);
            let a = (y - c).powi(2) + (x - c).powi(2) <= 400.0;
            let b = (y - c + 4.0).powi(2) + (x - c - 10.0).powi(2) <= 324.0;
            a && !b
        })?,
        poly("mushroom", &[(30.0, 4.0), (14.0, 14.0), (8.0, 32.0), (14.0, 50.0), (30.0, 60.0), (30.0, 40.0), (56.0, 40.0), (56.0, 24.0), (30.0, 24.0)])?,
        shapes::rect("phone", SIZE, SIZE, 10, 20, 44, 24)?,
        shapes::annulus("ring", SIZE, 12.0, 22.0)?,
        poly("rock", &[(14.0, 18.0), (10.0, 36.0), (18.0, 52.0), (40.0, 56.0), (54.0, 42.0), (50.0, 18.0), (34.0, 8.0)])?,
        poly("shoe", &[(20.0, 6.0), (20.0, 24.0), (34.0, 36.0), (38.0, 58.0), (50.0, 58.0), (50.0, 6.0)])?,
        shapes::star("star", SIZE, 5, 28.0, 11.0)?,
        poly("tree", &[(4.0, 32.0), (44.0, 8.0), (44.0, 28.0), (60.0, 28.0), (60.0, 36.0), (44.0, 36.0), (44.0, 56.0)])?,
        poly("umbrella", &[(30.0, 4.0), (14.0, 14.0), (10.0, 32.0), (14.0, 50.0), (30.0, 60.0), (30.0, 34.0), (58.0, 34.0), (58.0, 30.0), (30.0, 30.0)])?,
    ])
}

fn main() -> Result<()> {
    let out: PathBuf = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("masks"));
    std::fs::create_dir_all(&out).map_err(|e| assoc_bench::Error::Io {
        path: out.clone(),
        source: e,
    })?;
    for (i, mask) in catalogue()?.iter().enumerate() {
        let (ext, body) = if i % 2 == 0 {
            ("pgm", mask.to_pgm())
        } else {
            ("txt", mask.to_text_grid())
        };
        let path = out.join(format!("{}.{ext}", mask.class_id()));
        assoc_bench::io::write_atomic(&path, body)?;
        println!("{} {:>5} px -> {}", mask.class_id(), mask.foreground_count(), path.display());
    }
    Ok(())
}
