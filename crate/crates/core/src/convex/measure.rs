//! Monge-Ampère measures of subgradient images.
//!
//! Routes by representation:
//! * rank one, any function: the image of `[a, b]` is the interval
//!   `[min ∂f(a), max ∂f(b)]`, integrated directly in gradient space;
//! * rank two, smooth closed forms: change of variables, `∫_B F₁(∇f)·det D²f`;
//! * the Euclidean norm: the unit disc when a box holds the apex, else a null set;
//! * grid functions: union of per-node subgradient polygons rasterized at
//!   `h / raster_refine`, with `F₁` sampled at pixel centres.

use std::f64::consts::PI;

use super::grid::GridFn;
use super::hull;
use super::{BorelBox, ClosedForm, ConvexFn};
use crate::error::{Error, Result};
use crate::quadrature::{integrate, integrate_box2};

const MAX_PIXELS: usize = 50_000_000;

#[derive(Debug, Clone)]
pub struct MeasureOptions {
    /// Gauss–Legendre cells per axis per box.
    pub cells: usize,
    /// Gradient-space resolution is `h / raster_refine` for grid functions.
    pub raster_refine: f64,
    /// If set, an image reaching outside these bounds is an error.
    pub gradient_bounds: Option<BorelBox>,
}

impl Default for MeasureOptions {
    fn default() -> Self {
        MeasureOptions {
            cells: 16,
            raster_refine: 4.0,
            gradient_bounds: None,
        }
    }
}

fn check_boxes(f: &ConvexFn, boxes: &[BorelBox]) -> Result<()> {
    for b in boxes {
        if b.rank() != f.rank() {
            return Err(Error::RankMismatch {
                expected: f.rank(),
                got: b.rank(),
            });
        }
        if let ConvexFn::Grid(g) = f {
            let up = g.upper();
            let slack = 1e-9 * g.spacing();
            for k in 0..g.rank() {
                if b.lower()[k] < g.origin()[k] - slack || b.upper()[k] > up[k] + slack {
                    return Err(Error::OutsideDomain(b.upper().to_vec()));
                }
            }
        }
    }
    Ok(())
}

fn check_bounds(lo: &[f64], hi: &[f64], opts: &MeasureOptions) -> Result<()> {
    if let Some(b) = &opts.gradient_bounds {
        let tol = 1e-12;
        let escapes = (0..lo.len()).any(|k| lo[k] < b.lower()[k] - tol || hi[k] > b.upper()[k] + tol);
        if escapes {
            return Err(Error::ImageOutOfBounds {
                image: (lo.to_vec(), hi.to_vec()),
                bounds: (b.lower().to_vec(), b.upper().to_vec()),
            });
        }
    }
    Ok(())
}

/// `∫_{(grad f)(B)} F₁` for a union `B` of boxes with disjoint interiors.
pub fn image_integral(
    f: &ConvexFn,
    boxes: &[BorelBox],
    f1: &dyn Fn(&[f64]) -> f64,
    opts: &MeasureOptions,
) -> Result<f64> {
    check_boxes(f, boxes)?;
    if f.rank() == 1 {
        let mut intervals = Vec::with_capacity(boxes.len());
        for b in boxes {
            let lo = f.subgradient(b.lower())?.min_dot(&[1.0]);
            let hi = f.subgradient(b.upper())?.max_dot(&[1.0]);
            intervals.push((lo, hi));
        }
        return integrate_intervals(intervals, f1, opts);
    }
    match f {
        ConvexFn::Grid(g) => raster_integral(g, boxes, f1, opts),
        ConvexFn::ClosedForm(c) => closed_form_integral(c, boxes, f1, opts),
    }
}

fn integrate_intervals(mut iv: Vec<(f64, f64)>, f1: &dyn Fn(&[f64]) -> f64, opts: &MeasureOptions) -> Result<f64> {
    if iv.is_empty() {
        return Ok(0.0);
    }
    iv.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64)> = vec![iv[0]];
    for (lo, hi) in iv.into_iter().skip(1) {
        let last = merged.last_mut().unwrap();
        if lo <= last.1 {
            last.1 = last.1.max(hi);
        } else {
            merged.push((lo, hi));
        }
    }
    let lo = merged.first().unwrap().0;
    let hi = merged.last().unwrap().1;
    check_bounds(&[lo], &[hi], opts)?;
    Ok(merged
        .into_iter()
        .map(|(a, b)| {
            if b > a {
                integrate(|p| f1(&[p]), a, b, opts.cells)
            } else {
                0.0
            }
        })
        .sum())
}

fn closed_form_integral(
    c: &ClosedForm,
    boxes: &[BorelBox],
    f1: &dyn Fn(&[f64]) -> f64,
    opts: &MeasureOptions,
) -> Result<f64> {
    match c {
        ClosedForm::Norm { .. } => {
            check_bounds(&[-1.0, -1.0], &[1.0, 1.0], opts)?;
            if !boxes.iter().any(|b| b.contains(&[0.0, 0.0])) {
                return Ok(0.0);
            }
            // Polar quadrature over the unit disc.
            Ok(integrate(
                |r| r * integrate(|t| f1(&[r * t.cos(), r * t.sin()]), 0.0, 2.0 * PI, 4 * opts.cells),
                0.0,
                1.0,
                opts.cells,
            ))
        }
        c if c.is_smooth() => {
            let mut lo = [f64::INFINITY; 2];
            let mut hi = [f64::NEG_INFINITY; 2];
            for b in boxes {
                let n = opts.cells.max(2);
                for i in 0..=n {
                    for j in 0..=n {
                        let x = [
                            b.lower()[0] + (b.upper()[0] - b.lower()[0]) * i as f64 / n as f64,
                            b.lower()[1] + (b.upper()[1] - b.lower()[1]) * j as f64 / n as f64,
                        ];
                        let g = c.gradient(&x)?;
                        for k in 0..2 {
                            lo[k] = lo[k].min(g[k]);
                            hi[k] = hi[k].max(g[k]);
                        }
                    }
                }
            }
            check_bounds(&lo, &hi, opts)?;
            let mut total = 0.0;
            for b in boxes {
                total += integrate_box2(
                    |x, y| {
                        let p = [x, y];
                        let g = c.gradient(&p).expect("smooth fixture");
                        let h = c.hessian(&p).expect("rank checked").expect("smooth fixture");
                        f1(&g) * (h[0][0] * h[1][1] - h[0][1] * h[1][0])
                    },
                    [b.lower()[0], b.lower()[1]],
                    [b.upper()[0], b.upper()[1]],
                    [opts.cells, opts.cells],
                );
            }
            Ok(total)
        }
        other => Err(Error::Unsupported(format!(
            "no closed-form gradient-image integral for {other:?}; sample it onto a grid instead"
        ))),
    }
}

/// Grid nodes of `g` that lie in the union of boxes. Boxes are taken
/// half-open on their upper faces (closed where the face is the grid edge),
/// so boxes sharing a face never count a node twice.
pub(crate) fn nodes_in(g: &GridFn, boxes: &[BorelBox]) -> Vec<usize> {
    let tol = 1e-9 * g.spacing();
    let top = g.upper();
    (0..g.node_count())
        .filter(|&idx| {
            let x = g.node_position(&g.node(idx));
            boxes.iter().any(|b| {
                (0..g.rank()).all(|k| {
                    x[k] >= b.lower()[k] - tol
                        && (x[k] < b.upper()[k] - tol || (x[k] <= b.upper()[k] + tol && b.upper()[k] >= top[k] - tol))
                })
            })
        })
        .collect()
}

fn raster_integral(g: &GridFn, boxes: &[BorelBox], f1: &dyn Fn(&[f64]) -> f64, opts: &MeasureOptions) -> Result<f64> {
    let polys: Vec<Vec<[f64; 2]>> = nodes_in(g, boxes)
        .into_iter()
        .filter_map(|idx| {
            let s = g.node_subgradient(&g.node(idx));
            let v = s.vertices()?;
            (v.len() >= 3).then(|| v.iter().map(|p| [p[0], p[1]]).collect())
        })
        .collect();
    if polys.is_empty() {
        return Ok(0.0);
    }
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in polys.iter().flatten() {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    check_bounds(&lo, &hi, opts)?;

    let hg = g.spacing() / opts.raster_refine;
    let x0 = (lo[0] / hg).floor() * hg;
    let y0 = (lo[1] / hg).floor() * hg;
    let nx = ((hi[0] - x0) / hg).ceil() as usize + 1;
    let ny = ((hi[1] - y0) / hg).ceil() as usize + 1;
    if nx.saturating_mul(ny) > MAX_PIXELS {
        return Err(Error::Unsupported(format!(
            "gradient image needs {nx}×{ny} pixels; raise the grid spacing or lower raster_refine"
        )));
    }
    let mut hit = vec![false; nx * ny];
    for poly in &polys {
        let (mut pl, mut ph) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in poly {
            for k in 0..2 {
                pl[k] = pl[k].min(p[k]);
                ph[k] = ph[k].max(p[k]);
            }
        }
        let i0 = (((pl[0] - x0) / hg) - 0.5).floor().max(0.0) as usize;
        let i1 = ((((ph[0] - x0) / hg) - 0.5).ceil() as usize).min(nx - 1);
        let j0 = (((pl[1] - y0) / hg) - 0.5).floor().max(0.0) as usize;
        let j1 = ((((ph[1] - y0) / hg) - 0.5).ceil() as usize).min(ny - 1);
        for i in i0..=i1 {
            let cx = x0 + (i as f64 + 0.5) * hg;
            for j in j0..=j1 {
                let cell = i * ny + j;
                if !hit[cell] && hull::contains(poly, [cx, y0 + (j as f64 + 0.5) * hg]) {
                    hit[cell] = true;
                }
            }
        }
    }
    let mut total = 0.0;
    for i in 0..nx {
        for j in 0..ny {
            if hit[i * ny + j] {
                total += f1(&[x0 + (i as f64 + 0.5) * hg, y0 + (j as f64 + 0.5) * hg]);
            }
        }
    }
    Ok(total * hg * hg)
}

/// Alexandrov measure `Vol((grad f)(B))`.
pub fn ma_measure(f: &ConvexFn, boxes: &[BorelBox], opts: &MeasureOptions) -> Result<f64> {
    image_integral(f, boxes, &|_| 1.0, opts)
}

/// `|∫_B F₂ − ∫_{(grad f)(B)} F₁|`.
pub fn weighted_ma_identity_check(
    f: &ConvexFn,
    f1: &dyn Fn(&[f64]) -> f64,
    f2: &dyn Fn(&[f64]) -> f64,
    boxes: &[BorelBox],
    opts: &MeasureOptions,
) -> Result<f64> {
    let rhs = image_integral(f, boxes, f1, opts)?;
    let lhs: f64 = boxes
        .iter()
        .map(|b| match b.rank() {
            1 => integrate(|x| f2(&[x]), b.lower()[0], b.upper()[0], opts.cells),
            _ => integrate_box2(
                |x, y| f2(&[x, y]),
                [b.lower()[0], b.lower()[1]],
                [b.upper()[0], b.upper()[1]],
                [opts.cells, opts.cells],
            ),
        })
        .sum();
    Ok((lhs - rhs).abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_box() -> BorelBox {
        BorelBox::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap()
    }

    #[test]
    fn half_square_measure_is_box_volume() {
        let f = ConvexFn::from(ClosedForm::HalfSquaredNorm { rank: 2 });
        let m = ma_measure(&f, &[unit_box()], &MeasureOptions::default()).unwrap();
        assert!((m - 1.0).abs() < 1e-13);
    }

    #[test]
    fn paraboloid_measure_is_four() {
        let f = ConvexFn::from(ClosedForm::ShiftedParaboloid);
        let m = ma_measure(&f, &[unit_box()], &MeasureOptions::default()).unwrap();
        assert!((m - 4.0).abs() < 1e-13);
    }

    #[test]
    fn norm_measure_is_pi_iff_apex_inside() {
        let f = ConvexFn::from(ClosedForm::Norm { rank: 2 });
        let b = BorelBox::new(vec![-0.3, -2.0], vec![0.5, 0.1]).unwrap();
        let m = ma_measure(&f, &[b], &MeasureOptions::default()).unwrap();
        assert!((m - PI).abs() < 1e-12);
        let away = BorelBox::new(vec![0.2, 0.2], vec![1.0, 1.0]).unwrap();
        assert_eq!(ma_measure(&f, &[away], &MeasureOptions::default()).unwrap(), 0.0);
    }

    #[test]
    fn kink_fixtures_report_unsupported() {
        let f = ConvexFn::from(ClosedForm::named("ex34").unwrap());
        assert!(matches!(
            ma_measure(&f, &[unit_box()], &MeasureOptions::default()),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn grid_measure_of_half_square() {
        // The discrete measure of a box counts the dual cells of its nodes,
        // i.e. the box grown by h/2 on each open side.
        let h = 0.05;
        let g = GridFn::from_fn(vec![-0.5, -0.5], h, vec![41, 41], |x| 0.5 * (x[0] * x[0] + x[1] * x[1])).unwrap();
        let f = ConvexFn::from(g);
        let b = BorelBox::new(vec![-0.25, -0.25], vec![0.25, 0.25]).unwrap();
        let m = ma_measure(&f, &[b], &MeasureOptions::default()).unwrap();
        // nodes −0.25..0.20 in each axis: 10 nodes × h = 0.5 per side
        assert!((m - 0.25).abs() < 0.02, "{m}");
    }

    #[test]
    fn rank_one_image_is_an_interval() {
        let f = ConvexFn::from(ClosedForm::EguchiHanson { c: 4.0 });
        let b = BorelBox::new(vec![0.5], vec![1.5]).unwrap();
        let m = ma_measure(&f, &[b], &MeasureOptions::default()).unwrap();
        assert!((m - 2.0 * (1.5f64.sinh() - 0.5f64.sinh())).abs() < 1e-13);
    }

    #[test]
    fn escaping_image_is_reported() {
        let f = ConvexFn::from(ClosedForm::ShiftedParaboloid);
        let opts = MeasureOptions {
            gradient_bounds: Some(BorelBox::new(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap()),
            ..MeasureOptions::default()
        };
        assert!(matches!(
            ma_measure(&f, &[unit_box()], &opts),
            Err(Error::ImageOutOfBounds { .. })
        ));
    }
}
