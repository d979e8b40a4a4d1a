//! Resolves lasso selections and pointer positions to dashboard sub-regions.
//!
//! Ranking for a lasso, per visual, with τ the specificity threshold and a
//! region's overlap fraction = intersection area / region area:
//!
//! 1. if two or more sub-regions are each covered by at least τ, the lasso
//!    selected the visual as a whole and `VisualBody` wins;
//! 2. otherwise a specific region (title, axis, legend, filter control)
//!    covered by at least τ wins;
//! 3. otherwise the region with the largest intersection area wins, where
//!    area inside the visual but outside every sub-region counts for
//!    `VisualBody`.
//!
//! Across visuals the largest polygon/visual intersection wins; ties go to
//! the topmost visual, then the lexicographically smallest id.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::geometry::{self, Point, Rect, AREA_EPSILON};
use crate::model::{DashboardSpec, RegionKind, VisualSpec};

pub const DEFAULT_SPECIFICITY_THRESHOLD: f64 = 0.5;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum ResolveError {
    #[error("selection has zero area")]
    DegenerateGeometry,
    #[error("selection does not touch any visual")]
    NoHit,
}

/// A closed free-form selection path in page pixels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LassoPath {
    pub points: Vec<Point>,
}

impl LassoPath {
    pub fn new(points: Vec<Point>) -> Self {
        Self { points }
    }

    pub fn from_rect(rect: &Rect) -> Self {
        Self::new(rect.corners().to_vec())
    }

    /// Drops repeated and closing vertices; paths with fewer than three
    /// vertices, zero area or crossing edges become their bounding box.
    pub fn normalized(&self) -> Result<LassoPath, ResolveError> {
        if self.points.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(ResolveError::DegenerateGeometry);
        }
        let mut pts: Vec<Point> = Vec::with_capacity(self.points.len());
        for &p in &self.points {
            if pts.last() != Some(&p) {
                pts.push(p);
            }
        }
        while pts.len() > 1 && pts.first() == pts.last() {
            pts.pop();
        }
        let degenerate =
            pts.len() < 3 || geometry::polygon_area(&pts) <= AREA_EPSILON || geometry::is_self_intersecting(&pts);
        if degenerate {
            let bbox = geometry::bounding_box(&pts).ok_or(ResolveError::DegenerateGeometry)?;
            if bbox.area() <= AREA_EPSILON {
                return Err(ResolveError::DegenerateGeometry);
            }
            return Ok(LassoPath::from_rect(&bbox));
        }
        Ok(LassoPath::new(pts))
    }

    pub fn area(&self) -> f64 {
        geometry::polygon_area(&self.points)
    }

    pub fn scaled(&self, factor: f64) -> LassoPath {
        LassoPath::new(
            self.points
                .iter()
                .map(|p| Point::new(p.x * factor, p.y * factor))
                .collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RegionCandidate {
    pub visual_id: String,
    pub region: RegionKind,
    pub overlap_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RegionHit {
    pub visual_id: String,
    pub region: RegionKind,
    pub overlap_fraction: f64,
    pub anchor_bounds: Rect,
    #[serde(default)]
    pub alternates: Vec<RegionCandidate>,
}

/// Exact area of `path ∩ rect`: Sutherland-Hodgman clip then shoelace.
pub fn polygon_rect_intersection_area(path: &LassoPath, rect: &Rect) -> Result<f64, ResolveError> {
    if !rect.is_positive() {
        return Err(ResolveError::DegenerateGeometry);
    }
    let path = path.normalized()?;
    Ok(clipped_area(&path.points, rect))
}

fn clipped_area(points: &[Point], rect: &Rect) -> f64 {
    geometry::polygon_area(&geometry::clip_polygon_to_rect(points, rect))
}

struct Scored {
    region: RegionKind,
    area: f64,
    fraction: f64,
}

struct VisualScore<'a> {
    visual: &'a VisualSpec,
    z: usize,
    area: f64,
    winner: Scored,
    others: Vec<Scored>,
}

/// Precedence used to break exact ties between regions of one visual.
fn specificity_rank(region: RegionKind) -> u8 {
    match region {
        RegionKind::AxisX | RegionKind::AxisY | RegionKind::Legend | RegionKind::FilterControl => 0,
        RegionKind::Title => 1,
        RegionKind::DataArea => 2,
        RegionKind::VisualBody => 3,
    }
}

fn score_visual(points: &[Point], visual: &VisualSpec, tau: f64) -> Option<(f64, Scored, Vec<Scored>)> {
    let visual_area = clipped_area(points, &visual.bounds);
    if visual_area <= AREA_EPSILON {
        return None;
    }
    let mut scored: Vec<Scored> = visual
        .partition()
        .into_iter()
        .map(|(region, rect)| {
            let area = clipped_area(points, &rect);
            Scored {
                region,
                area,
                fraction: (area / rect.area()).clamp(0.0, 1.0),
            }
        })
        .collect();
    let covered: f64 = scored.iter().map(|s| s.area).sum();
    scored.push(Scored {
        region: RegionKind::VisualBody,
        area: (visual_area - covered).max(0.0),
        fraction: (visual_area / visual.bounds.area()).clamp(0.0, 1.0),
    });

    let qualifying = scored
        .iter()
        .filter(|s| s.region != RegionKind::VisualBody && s.fraction >= tau)
        .count();

    let winner_idx = if qualifying >= 2 {
        scored.iter().position(|s| s.region == RegionKind::VisualBody)
    } else {
        scored
            .iter()
            .position(|s| s.region.is_specific() && s.fraction >= tau)
            .or_else(|| {
                scored
                    .iter()
                    .enumerate()
                    .filter(|(_, s)| s.area > AREA_EPSILON)
                    .max_by(|(_, a), (_, b)| {
                        a.area
                            .partial_cmp(&b.area)
                            .unwrap_or(Ordering::Equal)
                            .then_with(|| specificity_rank(b.region).cmp(&specificity_rank(a.region)))
                    })
                    .map(|(i, _)| i)
            })
    }?;

    let winner = scored.swap_remove(winner_idx);
    let mut others: Vec<Scored> = scored.into_iter().filter(|s| s.area > AREA_EPSILON).collect();
    others.sort_by(|a, b| {
        b.fraction
            .partial_cmp(&a.fraction)
            .unwrap_or(Ordering::Equal)
            .then_with(|| specificity_rank(a.region).cmp(&specificity_rank(b.region)))
    });
    Some((visual_area, winner, others))
}

fn compare_visuals(a: &VisualScore<'_>, b: &VisualScore<'_>) -> Ordering {
    // descending area, then topmost, then smallest id
    b.area
        .partial_cmp(&a.area)
        .unwrap_or(Ordering::Equal)
        .then_with(|| b.z.cmp(&a.z))
        .then_with(|| a.visual.id.cmp(&b.visual.id))
}

pub fn resolve_lasso(path: &LassoPath, spec: &DashboardSpec) -> Result<RegionHit, ResolveError> {
    resolve_lasso_with(path, spec, DEFAULT_SPECIFICITY_THRESHOLD)
}

/// [`resolve_lasso`] with a custom specificity threshold τ.
pub fn resolve_lasso_with(path: &LassoPath, spec: &DashboardSpec, tau: f64) -> Result<RegionHit, ResolveError> {
    let path = path.normalized()?;
    let mut scores: Vec<VisualScore<'_>> = spec
        .visuals
        .iter()
        .enumerate()
        .filter_map(|(z, visual)| {
            score_visual(&path.points, visual, tau).map(|(area, winner, others)| VisualScore {
                visual,
                z,
                area,
                winner,
                others,
            })
        })
        .collect();
    if scores.is_empty() {
        return Err(ResolveError::NoHit);
    }
    scores.sort_by(compare_visuals);

    let best = &scores[0];
    let mut alternates: Vec<RegionCandidate> = best
        .others
        .iter()
        .map(|s| RegionCandidate {
            visual_id: best.visual.id.clone(),
            region: s.region,
            overlap_fraction: s.fraction,
        })
        .collect();
    alternates.extend(scores[1..].iter().map(|s| RegionCandidate {
        visual_id: s.visual.id.clone(),
        region: s.winner.region,
        overlap_fraction: s.winner.fraction,
    }));

    let anchor_bounds = best
        .visual
        .region_bounds(best.winner.region)
        .unwrap_or(best.visual.bounds);
    Ok(RegionHit {
        visual_id: best.visual.id.clone(),
        region: best.winner.region,
        overlap_fraction: best.winner.fraction,
        anchor_bounds,
        alternates,
    })
}

/// Topmost visual containing `point` and the most specific sub-region of it
/// that contains the point (half-open rectangles).
pub fn resolve_point(point: Point, spec: &DashboardSpec) -> Result<RegionHit, ResolveError> {
    let visual = spec
        .visuals
        .iter()
        .rev()
        .find(|v| v.bounds.contains_point(point))
        .ok_or(ResolveError::NoHit)?;
    let (region, anchor_bounds) = visual
        .partition()
        .into_iter()
        .filter(|(_, r)| r.contains_point(point))
        .min_by_key(|(region, _)| specificity_rank(*region))
        .unwrap_or((RegionKind::VisualBody, visual.bounds));
    Ok(RegionHit {
        visual_id: visual.id.clone(),
        region,
        overlap_fraction: 1.0,
        anchor_bounds,
        alternates: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AxisSpec, DataModelSpec, EncodingSet, FieldRef, InteractionCaps, ScaleType, VisualKind};

    fn axis() -> AxisSpec {
        AxisSpec {
            field: FieldRef::new("T", "C"),
            scale_type: ScaleType::Linear,
            unit: String::new(),
            label: String::new(),
            sub_bounds: None,
        }
    }

    fn visual(id: &str, kind: VisualKind, bounds: Rect) -> VisualSpec {
        let encodings = match kind {
            VisualKind::BarChart => EncodingSet {
                axis_x: Some(axis()),
                axis_y: Some(axis()),
                ..Default::default()
            },
            _ => EncodingSet::default(),
        };
        VisualSpec {
            id: id.into(),
            kind,
            title: id.into(),
            bounds,
            encodings,
            interactions: InteractionCaps::default(),
            description: String::new(),
            title_bounds: None,
            data_bounds: None,
            sample_data: None,
        }
    }

    fn spec(visuals: Vec<VisualSpec>) -> DashboardSpec {
        let raw = DashboardSpec {
            id: "d".into(),
            title: "d".into(),
            description: String::new(),
            page_bounds: Rect::new(0.0, 0.0, 1000.0, 1000.0),
            visuals,
            data_model: DataModelSpec::default(),
            insights: vec![],
        };
        crate::model::infer_sub_regions(&raw).unwrap()
    }

    fn square_path(x: f64, y: f64, s: f64) -> LassoPath {
        LassoPath::from_rect(&Rect::new(x, y, s, s))
    }

    #[test]
    fn intersection_area_examples() {
        let sq = square_path(0.0, 0.0, 10.0);
        assert_eq!(
            polygon_rect_intersection_area(&sq, &Rect::new(0.0, 0.0, 10.0, 10.0)).unwrap(),
            100.0
        );
        assert_eq!(
            polygon_rect_intersection_area(&sq, &Rect::new(5.0, 0.0, 10.0, 10.0)).unwrap(),
            50.0
        );
    }

    #[test]
    fn zero_area_inputs_are_degenerate() {
        let line = LassoPath::new(vec![Point::new(0.0, 5.0), Point::new(5.0, 5.0), Point::new(10.0, 5.0)]);
        assert_eq!(
            polygon_rect_intersection_area(&line, &Rect::new(0.0, 0.0, 10.0, 10.0)),
            Err(ResolveError::DegenerateGeometry)
        );
        // a diagonal stroke has zero area but a positive bounding box
        let diagonal = LassoPath::new(vec![Point::new(0.0, 0.0), Point::new(5.0, 5.0), Point::new(10.0, 10.0)]);
        assert_eq!(
            polygon_rect_intersection_area(&diagonal, &Rect::new(0.0, 0.0, 10.0, 10.0)),
            Ok(100.0)
        );
        let sq = square_path(0.0, 0.0, 10.0);
        assert_eq!(
            polygon_rect_intersection_area(&sq, &Rect::new(0.0, 0.0, 0.0, 10.0)),
            Err(ResolveError::DegenerateGeometry)
        );
    }

    #[test]
    fn two_point_path_becomes_bbox() {
        let p = LassoPath::new(vec![Point::new(0.0, 0.0), Point::new(4.0, 5.0)]);
        assert_eq!(p.normalized().unwrap().area(), 20.0);
    }

    #[test]
    fn bowtie_becomes_bbox() {
        let p = LassoPath::new(vec![
            Point::new(0.0, 0.0),
            Point::new(10.0, 10.0),
            Point::new(10.0, 0.0),
            Point::new(0.0, 10.0),
        ]);
        assert_eq!(p.normalized().unwrap().area(), 100.0);
    }

    #[test]
    fn closing_vertex_is_dropped() {
        let mut pts = Rect::new(0.0, 0.0, 2.0, 2.0).corners().to_vec();
        pts.push(pts[0]);
        assert_eq!(LassoPath::new(pts).normalized().unwrap().points.len(), 4);
    }

    #[test]
    fn tight_axis_y_rectangle_hits_axis() {
        let s = spec(vec![visual(
            "bar",
            VisualKind::BarChart,
            Rect::new(0.0, 0.0, 400.0, 300.0),
        )]);
        let strip = s.visuals[0].region_bounds(RegionKind::AxisY).unwrap();
        let hit = resolve_lasso(&LassoPath::from_rect(&strip), &s).unwrap();
        assert_eq!((hit.visual_id.as_str(), hit.region), ("bar", RegionKind::AxisY));
        assert!(hit.overlap_fraction >= 0.5);
        assert_eq!(hit.anchor_bounds, strip);
    }

    #[test]
    fn full_card_selection_is_visual_body() {
        let s = spec(vec![visual(
            "kpi",
            VisualKind::Kpi,
            Rect::new(100.0, 100.0, 300.0, 100.0),
        )]);
        let hit = resolve_lasso(&square_path(90.0, 90.0, 320.0), &s).unwrap();
        assert_eq!(hit.region, RegionKind::VisualBody);
        assert_eq!(hit.anchor_bounds, s.visuals[0].bounds);
    }

    #[test]
    fn data_area_selection_is_data_area() {
        let s = spec(vec![visual(
            "bar",
            VisualKind::BarChart,
            Rect::new(0.0, 0.0, 400.0, 300.0),
        )]);
        let data = s.visuals[0].data_bounds.unwrap();
        let hit = resolve_lasso(&LassoPath::from_rect(&data), &s).unwrap();
        assert_eq!(hit.region, RegionKind::DataArea);
    }

    #[test]
    fn straddling_selection_prefers_larger_share() {
        // two 200x200 cards side by side; lasso covers 60 px of the left one
        // and 40 px of the right one over the same height
        let s = spec(vec![
            visual("left", VisualKind::Kpi, Rect::new(0.0, 0.0, 200.0, 200.0)),
            visual("right", VisualKind::Kpi, Rect::new(200.0, 0.0, 200.0, 200.0)),
        ]);
        let path = LassoPath::from_rect(&Rect::new(140.0, 50.0, 100.0, 100.0));
        let hit = resolve_lasso(&path, &s).unwrap();
        assert_eq!(hit.visual_id, "left");
        assert_eq!(hit.alternates.last().unwrap().visual_id, "right");
    }

    #[test]
    fn equal_share_tie_goes_to_topmost() {
        let s = spec(vec![
            visual("a", VisualKind::Kpi, Rect::new(0.0, 0.0, 200.0, 200.0)),
            visual("b", VisualKind::Kpi, Rect::new(200.0, 0.0, 200.0, 200.0)),
        ]);
        let hit = resolve_lasso(&LassoPath::from_rect(&Rect::new(150.0, 50.0, 100.0, 100.0)), &s).unwrap();
        assert_eq!(hit.visual_id, "b");
    }

    #[test]
    fn empty_canvas_is_no_hit() {
        let s = spec(vec![visual("a", VisualKind::Kpi, Rect::new(0.0, 0.0, 200.0, 200.0))]);
        assert_eq!(
            resolve_lasso(&square_path(500.0, 500.0, 50.0), &s),
            Err(ResolveError::NoHit)
        );
        assert_eq!(resolve_point(Point::new(500.0, 500.0), &s), Err(ResolveError::NoHit));
    }

    #[test]
    fn point_in_stacked_visuals_hits_topmost() {
        let s = spec(vec![
            visual("under", VisualKind::Kpi, Rect::new(0.0, 0.0, 300.0, 300.0)),
            visual("over", VisualKind::Kpi, Rect::new(100.0, 100.0, 150.0, 150.0)),
        ]);
        assert_eq!(resolve_point(Point::new(150.0, 200.0), &s).unwrap().visual_id, "over");
        assert_eq!(resolve_point(Point::new(50.0, 200.0), &s).unwrap().visual_id, "under");
    }

    #[test]
    fn shared_edge_belongs_to_axis_strip() {
        let s = spec(vec![visual(
            "bar",
            VisualKind::BarChart,
            Rect::new(0.0, 0.0, 400.0, 300.0),
        )]);
        // data area spans y in [30, 264); the x-axis strip starts at y = 264
        let hit = resolve_point(Point::new(200.0, 264.0), &s).unwrap();
        assert_eq!(hit.region, RegionKind::AxisX);
        let above = resolve_point(Point::new(200.0, 263.999), &s).unwrap();
        assert_eq!(above.region, RegionKind::DataArea);
        // left edge of the data area (x = 48) is owned by the data area
        assert_eq!(
            resolve_point(Point::new(48.0, 100.0), &s).unwrap().region,
            RegionKind::DataArea
        );
        assert_eq!(
            resolve_point(Point::new(47.999, 100.0), &s).unwrap().region,
            RegionKind::AxisY
        );
    }

    #[test]
    fn kpi_points_resolve_to_title_or_data() {
        let s = spec(vec![visual("kpi", VisualKind::Kpi, Rect::new(0.0, 0.0, 300.0, 100.0))]);
        assert_eq!(
            resolve_point(Point::new(5.0, 5.0), &s).unwrap().region,
            RegionKind::Title
        );
        assert_eq!(
            resolve_point(Point::new(5.0, 50.0), &s).unwrap().region,
            RegionKind::DataArea
        );
    }

    #[test]
    fn unowned_corner_is_visual_body() {
        let s = spec(vec![visual(
            "bar",
            VisualKind::BarChart,
            Rect::new(0.0, 0.0, 400.0, 300.0),
        )]);
        let mut v = s.clone();
        // shrink the x-axis strip so the bottom-left corner belongs to no strip
        let axis = v.visuals[0].encodings.axis_x.as_mut().unwrap();
        axis.sub_bounds = Some(Rect::from_edges(48.0, 264.0, 400.0, 300.0));
        let hit = resolve_point(Point::new(10.0, 290.0), &v).unwrap();
        assert_eq!(hit.region, RegionKind::VisualBody);
        assert_eq!(hit.anchor_bounds, v.visuals[0].bounds);
    }

    mod invariance {
        use super::*;
        use crate::model::infer_sub_regions;
        use crate::sample::sample_dashboard;
        use proptest::prelude::*;

        fn winner(path: &LassoPath, spec: &DashboardSpec) -> Option<(String, RegionKind)> {
            resolve_lasso(path, spec).ok().map(|h| (h.visual_id, h.region))
        }

        // star-shaped around a centre, so the path never crosses itself
        fn star() -> impl Strategy<Value = Vec<Point>> {
            (
                0u32..1280,
                0u32..800,
                prop::collection::vec((0u32..360, 4u32..200), 3..12),
            )
                .prop_map(|(cx, cy, rays)| {
                    let mut rays = rays;
                    rays.sort_by_key(|r| r.0);
                    rays.dedup_by_key(|r| r.0);
                    rays.into_iter()
                        .map(|(deg, r)| {
                            let a = f64::from(deg).to_radians();
                            Point::new(
                                f64::from(cx) + f64::from(r) * a.cos(),
                                f64::from(cy) + f64::from(r) * a.sin(),
                            )
                        })
                        .collect()
                })
        }

        proptest! {
            #[test]
            fn winner_ignores_start_vertex_and_direction(points in star(), shift in 0usize..12) {
                let spec = infer_sub_regions(&sample_dashboard()).unwrap();
                let path = LassoPath::new(points.clone());
                let expected = winner(&path, &spec);
                let mut rotated = points.clone();
                let n = rotated.len();
                rotated.rotate_left(shift % n);
                prop_assert_eq!(&winner(&LassoPath::new(rotated), &spec), &expected);
                let mut reversed = points;
                reversed.reverse();
                prop_assert_eq!(&winner(&LassoPath::new(reversed), &spec), &expected);
            }

            #[test]
            fn winner_ignores_uniform_scaling(points in star(), factor in prop::sample::select(vec![0.5, 2.0, 3.0])) {
                let spec = infer_sub_regions(&sample_dashboard()).unwrap();
                let path = LassoPath::new(points);
                prop_assert_eq!(winner(&path.scaled(factor), &spec.scaled(factor)), winner(&path, &spec));
            }
        }
    }
}
