//! Legacy ASCII VTK export (structured points) for offline visualization.

use std::fmt::Write as _;
use std::path::Path;

use crate::curl::curl;
use crate::error::Result;
use crate::grid::{gradient_tensor, inverse_scalar_field, inverse_transform_unchecked, PhysicalScalarField,
    PhysicalVectorField, SpectralVectorField};
use crate::par;
use crate::solver::pressure_recover;

/// Pressure in physical space.
pub fn pressure_field(u: &SpectralVectorField) -> PhysicalScalarField {
    inverse_scalar_field(&pressure_recover(u))
}

/// Dissipation intensity `|∇u|²`.
pub fn dissipation_field(u: &SpectralVectorField) -> PhysicalScalarField {
    let g = gradient_tensor(u);
    let lat = u.lattice;
    let data = par::map_range(lat.len(), |i| g.iter().flatten().map(|f| f.data[i] * f.data[i]).sum());
    PhysicalScalarField { lattice: lat, data }
}

/// Vorticity magnitude `|ω|`.
pub fn vorticity_magnitude(u: &SpectralVectorField) -> PhysicalScalarField {
    let w = inverse_transform_unchecked(&curl(u));
    let data = par::map_range(w.lattice.len(), |i| crate::grid::norm3(w.at(i)));
    PhysicalScalarField { lattice: w.lattice, data }
}

pub fn render(field: &PhysicalVectorField, scalars: &[(&str, &PhysicalScalarField)]) -> String {
    let lat = field.lattice;
    let [n1, n2, n3] = lat.n();
    let [h1, h2, h3] = lat.spacing();
    let mut out = String::new();
    let _ = writeln!(out, "# vtk DataFile Version 3.0");
    let _ = writeln!(out, "spinflow field");
    let _ = writeln!(out, "ASCII");
    let _ = writeln!(out, "DATASET STRUCTURED_POINTS");
    let _ = writeln!(out, "DIMENSIONS {n1} {n2} {n3}");
    let _ = writeln!(out, "ORIGIN 0 0 0");
    let _ = writeln!(out, "SPACING {h1:e} {h2:e} {h3:e}");
    let _ = writeln!(out, "POINT_DATA {}", lat.len());
    let _ = writeln!(out, "VECTORS velocity double");
    for i in 0..lat.len() {
        let v = field.at(i);
        let _ = writeln!(out, "{:e} {:e} {:e}", v[0], v[1], v[2]);
    }
    for (name, s) in scalars {
        let _ = writeln!(out, "SCALARS {name} double 1");
        let _ = writeln!(out, "LOOKUP_TABLE default");
        for v in &s.data {
            let _ = writeln!(out, "{v:e}");
        }
    }
    out
}

pub fn export_vtk(field: &PhysicalVectorField, scalars: &[(&str, &PhysicalScalarField)], path: &Path) -> Result<()> {
    super::atomic_write(path, render(field, scalars).as_bytes())
}
