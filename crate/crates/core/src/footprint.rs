use crate::geometry::{compute_sbr, polygon_area, GeometryError, Polygon, Sbr};

/// One building outline at one level of detail, with the derived geometry
/// every relation test needs.
#[derive(Debug, Clone, PartialEq)]
pub struct BuildingFootprint {
    pub id: String,
    pub lod: u32,
    pub polygon: Polygon,
    pub area: f64,
    pub sbr: Sbr,
    pub rectangularity: f64,
    /// Externally supplied C-shape label for the outline itself.
    pub shape_c: bool,
}

impl BuildingFootprint {
    pub fn new(id: impl Into<String>, lod: u32, polygon: Polygon) -> Result<Self, GeometryError> {
        let sbr = compute_sbr(&polygon)?;
        let area = polygon_area(&polygon);
        Ok(Self {
            id: id.into(),
            lod,
            rectangularity: (area / sbr.area()).min(1.0),
            area,
            sbr,
            polygon,
            shape_c: false,
        })
    }

    pub fn with_shape_c(mut self, shape_c: bool) -> Self {
        self.shape_c = shape_c;
        self
    }

    /// Exterior vertex count (the closing repeat is never stored).
    pub fn edge_count(&self) -> usize {
        self.polygon.exterior().len()
    }
}
