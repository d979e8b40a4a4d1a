//! Fractional layout heuristics for sub-regions the author did not provide.
//!
//! Strips are peeled off the visual's bounds in a fixed order: title (top),
//! legend (its side), x-axis (bottom), y-axis (left). Whatever remains is the
//! data area, or the filter control for slicers. A strip's thickness is a
//! fraction of the visual's extent, clamped to `[floor, cap]`.

use super::{DashboardSpec, LegendPosition, SpecError, VisualKind, VisualSpec};
use crate::geometry::Rect;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StripRule {
    pub fraction: f64,
    pub floor: f64,
    pub cap: f64,
}

impl StripRule {
    fn thickness(&self, extent: f64) -> f64 {
        (self.fraction * extent).clamp(self.floor, self.cap)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayoutConstants {
    pub title: StripRule,
    pub axis_y: StripRule,
    pub axis_x: StripRule,
    pub legend: StripRule,
}

pub const LAYOUT: LayoutConstants = LayoutConstants {
    title: StripRule {
        fraction: 0.10,
        floor: 16.0,
        cap: 30.0,
    },
    axis_y: StripRule {
        fraction: 0.12,
        floor: 24.0,
        cap: 48.0,
    },
    axis_x: StripRule {
        fraction: 0.12,
        floor: 20.0,
        cap: 36.0,
    },
    legend: StripRule {
        fraction: 0.15,
        floor: 20.0,
        cap: f64::INFINITY,
    },
};

#[derive(Clone, Copy)]
enum Side {
    Top,
    Bottom,
    Left,
    Right,
    /// Top strip over the right half of the remaining width.
    TopRight,
}

/// Remaining free rectangle as edges.
struct Free {
    left: f64,
    top: f64,
    right: f64,
    bottom: f64,
}

impl Free {
    fn width(&self) -> f64 {
        self.right - self.left
    }

    fn height(&self) -> f64 {
        self.bottom - self.top
    }

    /// Carves a strip of `thickness` from `side`, returning its rectangle.
    fn carve(&mut self, side: Side, thickness: f64) -> Option<Rect> {
        let fits = match side {
            Side::Top | Side::Bottom | Side::TopRight => thickness < self.height(),
            Side::Left | Side::Right => thickness < self.width(),
        };
        if !fits || self.width() <= 0.0 {
            return None;
        }
        let strip = match side {
            Side::Top => Rect::from_edges(self.left, self.top, self.right, self.top + thickness),
            Side::TopRight => {
                let mid = self.left + self.width() / 2.0;
                Rect::from_edges(mid, self.top, self.right, self.top + thickness)
            }
            Side::Bottom => Rect::from_edges(self.left, self.bottom - thickness, self.right, self.bottom),
            Side::Left => Rect::from_edges(self.left, self.top, self.left + thickness, self.bottom),
            Side::Right => Rect::from_edges(self.right - thickness, self.top, self.right, self.bottom),
        };
        self.exclude(side, &strip);
        Some(strip)
    }

    /// Shrinks the free area past an existing strip on `side`.
    fn exclude(&mut self, side: Side, strip: &Rect) {
        match side {
            Side::Top | Side::TopRight => self.top = self.top.max(strip.bottom()),
            Side::Bottom => self.bottom = self.bottom.min(strip.top()),
            Side::Left => self.left = self.left.max(strip.right()),
            Side::Right => self.right = self.right.min(strip.left()),
        }
    }
}

fn legend_side(position: LegendPosition) -> Side {
    match position {
        LegendPosition::Top => Side::Top,
        LegendPosition::Bottom => Side::Bottom,
        LegendPosition::Left => Side::Left,
        LegendPosition::Right => Side::Right,
        LegendPosition::TopRight => Side::TopRight,
    }
}

/// Fills every missing title/axis/legend rectangle and recomputes the data
/// area of each visual. Provided geometry is kept verbatim; running this on
/// its own output is a no-op.
pub fn infer_sub_regions(spec: &DashboardSpec) -> Result<DashboardSpec, SpecError> {
    let mut out = spec.clone();
    for (i, visual) in out.visuals.iter_mut().enumerate() {
        layout_visual(visual, &LAYOUT).map_err(|msg| SpecError::geometry(format!("visuals[{i}]"), msg))?;
    }
    Ok(out)
}

fn layout_visual(v: &mut VisualSpec, k: &LayoutConstants) -> Result<(), String> {
    let b = v.bounds;
    let mut free = Free {
        left: b.left(),
        top: b.top(),
        right: b.right(),
        bottom: b.bottom(),
    };

    let too_small = |what: &str| format!("visual {:?} ({}x{}) is too small for its {what} strip", v.id, b.w, b.h);

    v.title_bounds =
        Some(place(&mut free, Side::Top, v.title_bounds, k.title.thickness(b.h)).ok_or_else(|| too_small("title"))?);

    if let Some(legend) = v.encodings.legend.as_mut() {
        let side = legend_side(legend.position);
        let extent = match side {
            Side::Left | Side::Right => b.w,
            _ => b.h,
        };
        legend.sub_bounds = Some(
            place(&mut free, side, legend.sub_bounds, k.legend.thickness(extent)).ok_or_else(|| too_small("legend"))?,
        );
    }
    if let Some(axis) = v.encodings.axis_x.as_mut() {
        axis.sub_bounds = Some(
            place(&mut free, Side::Bottom, axis.sub_bounds, k.axis_x.thickness(b.h))
                .ok_or_else(|| too_small("x-axis"))?,
        );
    }
    if let Some(axis) = v.encodings.axis_y.as_mut() {
        axis.sub_bounds = Some(
            place(&mut free, Side::Left, axis.sub_bounds, k.axis_y.thickness(b.w))
                .ok_or_else(|| too_small("y-axis"))?,
        );
    }

    if free.width() <= 0.0 || free.height() <= 0.0 {
        return Err(format!("visual {:?} has no room left for its content area", v.id));
    }
    let content = Rect::from_edges(free.left, free.top, free.right, free.bottom);
    v.data_bounds = Some(content);

    let parts = v.partition();
    for (i, (ra, a)) in parts.iter().enumerate() {
        for (rb, bb) in &parts[i + 1..] {
            if a.overlaps(bb) {
                return Err(format!("{ra} and {rb} of visual {:?} overlap", v.id));
            }
        }
    }
    debug_assert!(v.kind != VisualKind::Slicer || v.encodings.axis_x.is_none());
    Ok(())
}

fn place(free: &mut Free, side: Side, provided: Option<Rect>, thickness: f64) -> Option<Rect> {
    match provided {
        Some(rect) => {
            free.exclude(side, &rect);
            Some(rect)
        }
        None => free.carve(side, thickness),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AxisSpec, EncodingSet, FieldRef, InteractionCaps, LegendSpec, ScaleType};
    use crate::model::{DataModelSpec, RegionKind};

    fn field() -> FieldRef {
        FieldRef::new("T", "C")
    }

    fn axis() -> AxisSpec {
        AxisSpec {
            field: field(),
            scale_type: ScaleType::Linear,
            unit: String::new(),
            label: String::new(),
            sub_bounds: None,
        }
    }

    fn visual(kind: VisualKind, bounds: Rect, encodings: EncodingSet) -> VisualSpec {
        VisualSpec {
            id: "v".into(),
            kind,
            title: "V".into(),
            bounds,
            encodings,
            interactions: InteractionCaps::default(),
            description: String::new(),
            title_bounds: None,
            data_bounds: None,
            sample_data: None,
        }
    }

    fn spec_with(v: VisualSpec) -> DashboardSpec {
        DashboardSpec {
            id: "d".into(),
            title: "D".into(),
            description: String::new(),
            page_bounds: Rect::new(0.0, 0.0, 2000.0, 2000.0),
            visuals: vec![v],
            data_model: DataModelSpec::default(),
            insights: vec![],
        }
    }

    fn bar_400x300() -> VisualSpec {
        visual(
            VisualKind::BarChart,
            Rect::new(0.0, 0.0, 400.0, 300.0),
            EncodingSet {
                axis_x: Some(axis()),
                axis_y: Some(axis()),
                ..Default::default()
            },
        )
    }

    #[test]
    fn bar_chart_strips_follow_fractions() {
        // Expected values: title = min(0.10*300, 30) = 30, axis-y = min(0.12*400, 48) = 48,
        // axis-x = min(0.12*300, 36) = 36, so the axis-x strip starts at 300-36 = 264.
        let out = infer_sub_regions(&spec_with(bar_400x300())).unwrap();
        let v = &out.visuals[0];
        assert_eq!(v.title_bounds, Some(Rect::from_edges(0.0, 0.0, 400.0, 30.0)));
        assert_eq!(
            v.region_bounds(RegionKind::AxisX),
            Some(Rect::from_edges(0.0, 264.0, 400.0, 300.0))
        );
        assert_eq!(
            v.region_bounds(RegionKind::AxisY),
            Some(Rect::from_edges(0.0, 30.0, 48.0, 264.0))
        );
        assert_eq!(
            v.region_bounds(RegionKind::DataArea),
            Some(Rect::from_edges(48.0, 30.0, 400.0, 264.0))
        );
    }

    #[test]
    fn provided_axis_is_kept() {
        let mut v = bar_400x300();
        let given = Rect::new(0.0, 30.0, 40.0, 200.0);
        v.encodings.axis_y.as_mut().unwrap().sub_bounds = Some(given);
        let out = infer_sub_regions(&spec_with(v)).unwrap();
        assert_eq!(out.visuals[0].region_bounds(RegionKind::AxisY), Some(given));
        assert_eq!(out.visuals[0].data_bounds.unwrap().left(), 40.0);
    }

    #[test]
    fn idempotent() {
        let mut v = bar_400x300();
        v.encodings.legend = Some(LegendSpec {
            field: field(),
            position: LegendPosition::TopRight,
            entries: vec!["a".into()],
            sub_bounds: None,
        });
        let once = infer_sub_regions(&spec_with(v)).unwrap();
        let twice = infer_sub_regions(&once).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn tiny_visual_is_geometry_error() {
        // title floor 16px alone exceeds a 10px tall visual
        let mut v = bar_400x300();
        v.bounds = Rect::new(0.0, 0.0, 10.0, 10.0);
        assert!(matches!(
            infer_sub_regions(&spec_with(v)),
            Err(SpecError::Geometry { .. })
        ));
        let kpi = visual(VisualKind::Kpi, Rect::new(0.0, 0.0, 10.0, 10.0), EncodingSet::default());
        assert!(matches!(
            infer_sub_regions(&spec_with(kpi)),
            Err(SpecError::Geometry { .. })
        ));
    }

    #[test]
    fn overlapping_provided_geometry_rejected() {
        let mut v = bar_400x300();
        // y-axis provided inside the title band
        v.encodings.axis_y.as_mut().unwrap().sub_bounds = Some(Rect::new(0.0, 0.0, 40.0, 200.0));
        assert!(matches!(
            infer_sub_regions(&spec_with(v)),
            Err(SpecError::Geometry { .. })
        ));
    }

    #[test]
    fn slicer_content_is_filter_control() {
        let mut v = visual(
            VisualKind::Slicer,
            Rect::new(0.0, 0.0, 300.0, 100.0),
            EncodingSet::default(),
        );
        v.encodings.category = Some(field());
        let out = infer_sub_regions(&spec_with(v)).unwrap();
        let v = &out.visuals[0];
        assert_eq!(
            v.region_bounds(RegionKind::FilterControl),
            Some(Rect::from_edges(0.0, 16.0, 300.0, 100.0))
        );
        assert_eq!(v.region_bounds(RegionKind::DataArea), None);
    }
}
