//! Canonical designs used across the test suites, the benches and the CLI
//! examples, plus seeded generators for randomized checks.
//!
//! All dimensions are millimeters; every fixture uses the default 0.15 mm
//! filament unless noted.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::Vec3;
use crate::model::{DesignBuilder, FrameDesign, JointId};

pub const DIAMETER: f64 = 0.15;

/// Three grounded feet joined by 45° legs to one apex.
pub fn tripod() -> FrameDesign {
    let mut b = DesignBuilder::new(DIAMETER);
    let apex = b.joint("apex", Vec3::new(0.0, 0.0, 4.0));
    for (i, deg) in [90.0f64, 210.0, 330.0].iter().enumerate() {
        let a = deg.to_radians();
        let g = b.ground(&format!("g{}", i + 1), 4.0 * a.cos(), 4.0 * a.sin());
        b.beam(&format!("t{}", i + 1), g, apex);
    }
    b.build().expect("tripod fixture")
}

/// A three-beam chain rising from a single grounded joint.
pub fn chain3() -> FrameDesign {
    let mut b = DesignBuilder::new(DIAMETER);
    let g = b.ground("g", 0.0, 0.0);
    let c1 = b.joint("c1", Vec3::new(3.0, 0.0, 2.0));
    let c2 = b.joint("c2", Vec3::new(6.0, 0.0, 3.0));
    let c3 = b.joint("c3", Vec3::new(9.0, 0.0, 4.0));
    b.beam("c1", g, c1);
    b.beam("c2", c1, c2);
    b.beam("c3", c2, c3);
    b.build().expect("chain3 fixture")
}

/// Two grounded joints joined through a common apex.
pub fn loop_arch() -> FrameDesign {
    let mut b = DesignBuilder::new(DIAMETER);
    let g1 = b.ground("g1", 0.0, 0.0);
    let g2 = b.ground("g2", 8.0, 0.0);
    let apex = b.joint("apex", Vec3::new(4.0, 0.0, 4.0));
    b.beam("l1", g1, apex);
    b.beam("l2", g2, apex);
    b.build().expect("loop fixture")
}

/// Two independent two-beam chains 20 mm apart.
pub fn two_chains() -> FrameDesign {
    let mut b = DesignBuilder::new(DIAMETER);
    for (k, y) in [0.0, 20.0].iter().enumerate() {
        let g = b.ground(&format!("g{k}"), 0.0, *y);
        let a = b.joint(&format!("a{k}"), Vec3::new(3.0, *y, 2.0));
        let c = b.joint(&format!("c{k}"), Vec3::new(6.0, *y, 3.0));
        b.beam(&format!("a{k}"), g, a);
        b.beam(&format!("c{k}"), a, c);
    }
    b.build().expect("two chains fixture")
}

/// One straight beam of the given length leaving a grounded joint along
/// `direction`.
pub fn straight_cantilever(direction: Vec3, length: f64, diameter: f64) -> FrameDesign {
    let mut b = DesignBuilder::new(diameter);
    let g = b.ground("root", 0.0, 0.0);
    let tip = b.joint("tip", direction.normalize() * length);
    b.beam("beam", g, tip);
    b.build().expect("cantilever fixture")
}

/// Two grounded joints under an apex, a beam hanging off the apex, and a
/// beam that crosses 0.5 mm above the midpoint of the first leg.
///
/// Beams: `blue` g1→P, `magenta` g2→P, `yellow` P→Q (hangs in the finished
/// design), `white` g3→W (crosses over `blue`).
pub fn fig2() -> FrameDesign {
    fig2_base().build().expect("fig2 fixture")
}

/// [`fig2`] plus a second apex beam `red` P→R whose far end is also held by
/// a grounded post `post_r`. Printing `yellow` and `red` both before `P` is
/// closed leaves two beams hanging from one joint.
pub fn fig2_double() -> FrameDesign {
    let mut b = fig2_base();
    let p = JointId(2);
    let r = b.joint("R", Vec3::new(5.0, -4.0, 4.6));
    let g5 = b.ground("g5", 5.0, -8.0);
    b.beam("red", p, r);
    b.beam("post_r", g5, r);
    b.build().expect("fig2 double fixture")
}

fn fig2_base() -> DesignBuilder {
    let mut b = DesignBuilder::new(DIAMETER);
    let g1 = b.ground("g1", 0.0, 0.0);
    let g2 = b.ground("g2", 10.0, 0.0);
    let p = b.joint("P", Vec3::new(5.0, 0.0, 4.0));
    let q = b.joint("Q", Vec3::new(5.0, 4.0, 4.6));
    let g3 = b.ground("g3", 2.5, -5.0);
    let w = b.joint("W", Vec3::new(2.5, 3.0, 4.0));
    b.beam("blue", g1, p);
    b.beam("magenta", g2, p);
    b.beam("yellow", p, q);
    b.beam("white", g3, w);
    b
}

/// A compliant helix and a stiff braced post, both grounded, joined at the
/// top by one horizontal beam (`bridge`) from the helix top `L` to the post
/// top `R`. The post is a vertical beam held by two diagonal braces.
pub fn fig4() -> FrameDesign {
    let mut b = DesignBuilder::new(DIAMETER);
    let radius = 2.5;
    let height = 8.0;
    let turns = 2.0;
    let segments = 16;
    let start = b.ground("helix_base", radius, 0.0);
    let mut prev = start;
    for k in 1..=segments {
        let t = k as f64 / segments as f64;
        let a = t * turns * std::f64::consts::TAU;
        let name = if k == segments { "L".to_string() } else { format!("h{k}") };
        let j = b.joint(&name, Vec3::new(radius * a.cos(), radius * a.sin(), height * t));
        b.beam(&format!("helix{k}"), prev, j);
        prev = j;
    }
    let l = prev;
    let post_base = b.ground("post_base", radius + 6.0, 0.0);
    let r = b.joint("R", Vec3::new(radius + 6.0, 0.0, height));
    b.beam("post", post_base, r);
    for (k, y) in [(1, 3.0), (2, -3.0)] {
        let g = b.ground(&format!("brace_base{k}"), radius + 12.0, y);
        b.beam(&format!("brace{k}"), g, r);
    }
    b.beam("bridge", l, r);
    b.build().expect("fig4 fixture")
}

/// An arch of four beams between two grounded joints with a second arch of
/// two beams resting on it. The lower arch must be completed first; the
/// upper arch grows from the newly stabilised joints.
pub fn fig6() -> FrameDesign {
    let mut b = DesignBuilder::new(DIAMETER);
    let g1 = b.ground("g1", 0.0, 0.0);
    let g2 = b.ground("g2", 12.0, 0.0);
    let a1 = b.joint("a1", Vec3::new(2.0, 0.0, 3.0));
    let a2 = b.joint("a2", Vec3::new(6.0, 0.0, 4.0));
    let a3 = b.joint("a3", Vec3::new(10.0, 0.0, 3.0));
    let top = b.joint("top", Vec3::new(6.0, 3.0, 8.0));
    b.beam("s1", g1, a1);
    b.beam("s2", a1, a2);
    b.beam("s3", a2, a3);
    b.beam("s4", a3, g2);
    b.beam("u1", a1, top);
    b.beam("u2", a3, top);
    b.build().expect("fig6 fixture")
}

/// Rectangular lattice: `nx × ny` grounded feet, `layers` levels of
/// vertical posts of height `cell`, each level tied together by horizontal
/// beams along x and y.
pub fn lattice(nx: usize, ny: usize, layers: usize, cell: f64) -> FrameDesign {
    let mut b = DesignBuilder::new(DIAMETER);
    let mut below: Vec<JointId> = Vec::with_capacity(nx * ny);
    for i in 0..nx {
        for j in 0..ny {
            below.push(b.ground(&format!("g_{i}_{j}"), i as f64 * cell, j as f64 * cell));
        }
    }
    for k in 1..=layers {
        let z = k as f64 * cell;
        let mut level = Vec::with_capacity(nx * ny);
        for i in 0..nx {
            for j in 0..ny {
                let jt = b.joint(&format!("n_{i}_{j}_{k}"), Vec3::new(i as f64 * cell, j as f64 * cell, z));
                b.beam(&format!("post_{i}_{j}_{k}"), below[i * ny + j], jt);
                level.push(jt);
            }
        }
        for i in 0..nx {
            for j in 0..ny {
                if i + 1 < nx {
                    b.beam(&format!("x_{i}_{j}_{k}"), level[i * ny + j], level[(i + 1) * ny + j]);
                }
                if j + 1 < ny {
                    b.beam(&format!("y_{i}_{j}_{k}"), level[i * ny + j], level[i * ny + j + 1]);
                }
            }
        }
        below = level;
    }
    b.build().expect("lattice fixture")
}

/// Number of beams in [`lattice`].
pub fn lattice_beam_count(nx: usize, ny: usize, layers: usize) -> usize {
    layers * (nx * ny + (nx - 1) * ny + nx * (ny - 1))
}

/// Jittered lattice with random diagonal braces and random deletions.
/// Not necessarily constructable; callers filter with the planner or the
/// oracle.
pub fn random_frame(seed: u64, nx: usize, ny: usize, layers: usize) -> FrameDesign {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cell = 4.0;
    let mut b = DesignBuilder::new(DIAMETER);
    let jitter = |rng: &mut ChaCha8Rng| rng.gen_range(-0.6..0.6);
    let mut below: Vec<JointId> = Vec::new();
    for i in 0..nx {
        for j in 0..ny {
            let (x, y) = (i as f64 * cell + jitter(&mut rng), j as f64 * cell + jitter(&mut rng));
            below.push(b.ground(&format!("g_{i}_{j}"), x, y));
        }
    }
    let mut count = 0usize;
    let mut name = |prefix: &str| {
        count += 1;
        format!("{prefix}{count}")
    };
    for k in 1..=layers {
        let mut level = Vec::new();
        for i in 0..nx {
            for j in 0..ny {
                let z = k as f64 * cell + jitter(&mut rng) * 0.5;
                let p = Vec3::new(i as f64 * cell + jitter(&mut rng), j as f64 * cell + jitter(&mut rng), z);
                let jt = b.joint(&format!("n_{i}_{j}_{k}"), p);
                b.beam(&name("post"), below[i * ny + j], jt);
                level.push(jt);
            }
        }
        for i in 0..nx {
            for j in 0..ny {
                if i + 1 < nx && rng.gen_bool(0.85) {
                    b.beam(&name("x"), level[i * ny + j], level[(i + 1) * ny + j]);
                }
                if j + 1 < ny && rng.gen_bool(0.85) {
                    b.beam(&name("y"), level[i * ny + j], level[i * ny + j + 1]);
                }
                if i + 1 < nx && rng.gen_bool(0.25) {
                    // Brace rising from the level below into this level.
                    b.beam(&name("d"), below[i * ny + j], level[(i + 1) * ny + j]);
                }
            }
        }
        below = level;
    }
    b.build_unchecked()
}

/// Small random designs (at most `max_beams` beams) over 2–3 grounded feet
/// and 1–3 free joints. Not necessarily constructable or even valid
/// (duplicates are possible); callers filter.
pub fn random_small(seed: u64, max_beams: usize) -> FrameDesign {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = DesignBuilder::new(DIAMETER);
    let n_ground = rng.gen_range(2..=3);
    let n_free = rng.gen_range(1..=3);
    let mut ground = Vec::new();
    for i in 0..n_ground {
        let a = (i as f64 / n_ground as f64) * std::f64::consts::TAU + rng.gen_range(-0.3..0.3);
        let r = rng.gen_range(4.0..7.0);
        ground.push(b.ground(&format!("g{i}"), r * a.cos(), r * a.sin()));
    }
    let mut free = Vec::new();
    for i in 0..n_free {
        let p = Vec3::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0), rng.gen_range(2.5..5.0) + i as f64 * 0.7);
        free.push(b.joint(&format!("f{i}"), p));
    }
    let mut pairs = Vec::new();
    for &f in &free {
        for &g in &ground {
            pairs.push((g, f));
        }
    }
    for i in 0..free.len() {
        for k in 0..i {
            pairs.push((free[k], free[i]));
        }
    }
    // Shuffle and take a prefix; ensure each free joint gets at least one beam.
    for i in (1..pairs.len()).rev() {
        let k = rng.gen_range(0..=i);
        pairs.swap(i, k);
    }
    let target = rng.gen_range(2..=max_beams.min(pairs.len()));
    let mut chosen: Vec<(JointId, JointId)> = pairs.iter().copied().take(target).collect();
    for &f in &free {
        if !chosen.iter().any(|(a, c)| *a == f || *c == f) {
            if let Some(pair) = pairs.iter().find(|(a, c)| *a == f || *c == f) {
                if chosen.len() < max_beams {
                    chosen.push(*pair);
                } else {
                    chosen[0] = *pair;
                }
            }
        }
    }
    for (k, (p, q)) in chosen.into_iter().enumerate() {
        b.beam(&format!("b{k}"), p, q);
    }
    b.build_unchecked()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_design;

    #[test]
    fn fixtures_are_valid() {
        for d in [tripod(), chain3(), loop_arch(), two_chains(), fig2(), fig2_double(), fig4(), fig6()] {
            assert_eq!(validate_design(&d), vec![]);
        }
    }

    #[test]
    fn lattice_count_matches() {
        let d = lattice(3, 2, 2, 4.0);
        assert_eq!(d.beam_count(), lattice_beam_count(3, 2, 2));
        assert_eq!(validate_design(&d), vec![]);
    }

    #[test]
    fn generators_are_deterministic() {
        assert_eq!(random_frame(7, 3, 3, 2), random_frame(7, 3, 3, 2));
        assert_eq!(random_small(11, 8), random_small(11, 8));
        assert!(random_small(11, 8).beam_count() <= 8);
    }
}
