//! Geometry and incidence structure for the periodic 2D toric lattice
//! and the 3D cubic-link lattice, plus sublattice coloring for parallel
//! gate sweeps.
//!
//! Link indexing is deterministic: toric link id = `2*(x + L*y) + d`
//! with d = 0 for the east link and d = 1 for the north link of vertex
//! (x, y); cubic link id = `3*cell + axis`.

use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString};

/// Kind of local term a coloring partitions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TermKind {
    Plaquette,
    Vertex,
    Octahedron,
}

/// 2D square lattice with spins on links, periodic in both directions.
#[derive(Debug, Clone)]
pub struct ToricLattice {
    pub l: usize,
    pub link_count: usize,
    /// Four links around each elementary square, index p = x + L*y.
    pub plaquettes: Vec<[usize; 4]>,
    /// Four links incident to each vertex, index s = x + L*y.
    pub vertices: Vec<[usize; 4]>,
    /// Abstract control-qubit slot ids, one per plaquette / vertex.
    pub plaquette_controls: Vec<usize>,
    pub vertex_controls: Vec<usize>,
    /// Endpoint vertex ids of each link, for coloring conflicts.
    link_endpoints: Vec<(usize, usize)>,
}

impl ToricLattice {
    fn vertex_id(&self, x: usize, y: usize) -> usize {
        (x % self.l) + self.l * (y % self.l)
    }

    pub fn link_east(&self, x: usize, y: usize) -> usize {
        2 * ((x % self.l) + self.l * (y % self.l))
    }

    pub fn link_north(&self, x: usize, y: usize) -> usize {
        2 * ((x % self.l) + self.l * (y % self.l)) + 1
    }

    /// X-stabilizer A_p on the four plaquette links.
    pub fn plaquette_stabilizer(&self, p: usize) -> PauliString {
        PauliString::uniform(self.link_count, &self.plaquettes[p], Pauli::X)
    }

    /// Z-stabilizer B_s on the four star links.
    pub fn vertex_stabilizer(&self, s: usize) -> PauliString {
        PauliString::uniform(self.link_count, &self.vertices[s], Pauli::Z)
    }

    pub fn link_endpoints(&self) -> &[(usize, usize)] {
        &self.link_endpoints
    }

    /// The two plaquettes sharing a link.
    pub fn plaquettes_of_link(&self, link: usize) -> [usize; 2] {
        let mut found = Vec::with_capacity(2);
        for (p, links) in self.plaquettes.iter().enumerate() {
            if links.contains(&link) {
                found.push(p);
            }
        }
        [found[0], found[1]]
    }

    /// The two vertices sharing a link.
    pub fn vertices_of_link(&self, link: usize) -> [usize; 2] {
        let mut found = Vec::with_capacity(2);
        for (s, links) in self.vertices.iter().enumerate() {
            if links.contains(&link) {
                found.push(s);
            }
        }
        [found[0], found[1]]
    }
}

pub fn build_toric(l: usize) -> Result<ToricLattice> {
    if l < 2 {
        return Err(Error::InvalidLattice(format!(
            "toric lattice needs L >= 2, got {l}"
        )));
    }
    let link_count = 2 * l * l;
    let mut lat = ToricLattice {
        l,
        link_count,
        plaquettes: Vec::with_capacity(l * l),
        vertices: Vec::with_capacity(l * l),
        plaquette_controls: (0..l * l).map(|i| link_count + i).collect(),
        vertex_controls: (0..l * l).map(|i| link_count + l * l + i).collect(),
        link_endpoints: vec![(0, 0); link_count],
    };
    for y in 0..l {
        for x in 0..l {
            // plaquette with lower-left corner (x, y): bottom, right, top, left
            lat.plaquettes.push([
                lat.link_east(x, y),
                lat.link_north(x + 1, y),
                lat.link_east(x, y + 1),
                lat.link_north(x, y),
            ]);
            // star at vertex (x, y)
            lat.vertices.push([
                lat.link_east(x, y),
                lat.link_north(x, y),
                lat.link_east(x + l - 1, y),
                lat.link_north(x, y + l - 1),
            ]);
            let east = lat.link_east(x, y);
            lat.link_endpoints[east] = (lat.vertex_id(x, y), lat.vertex_id(x + 1, y));
            let north = lat.link_north(x, y);
            lat.link_endpoints[north] = (lat.vertex_id(x, y), lat.vertex_id(x, y + 1));
        }
    }
    Ok(lat)
}

/// 3D cubic lattice with spins on links; octahedra sit on the cubic
/// sites and collect the six incident link slots.
///
/// A periodic dimension of size 1 wraps the two opposite slots of an
/// octahedron onto the same link; the slot list keeps the multiplicity
/// (the link then contributes twice to `S_o^z`). Plaquettes that would
/// contain a repeated link are dropped.
#[derive(Debug, Clone)]
pub struct CubicLattice {
    pub dims: (usize, usize, usize),
    pub link_count: usize,
    /// Six link slots per site, with multiplicity when a dimension is 1.
    pub octahedra: Vec<[usize; 6]>,
    /// Cyclically ordered 4-link plaquettes; opposite entries (1,3) and
    /// (2,4) matter for the S+ S- S+ S- assembly.
    pub plaquettes: Vec<[usize; 4]>,
    pub octahedron_controls: Vec<usize>,
    pub plaquette_controls: Vec<usize>,
    link_endpoints: Vec<(usize, usize)>,
}

impl CubicLattice {
    pub fn site_count(&self) -> usize {
        self.dims.0 * self.dims.1 * self.dims.2
    }

    fn site_id(&self, x: usize, y: usize, z: usize) -> usize {
        let (lx, ly, _) = self.dims;
        (x % lx) + lx * ((y % ly) + ly * (z % self.dims.2))
    }

    /// Link along `axis` (0 = x, 1 = y, 2 = z) leaving site (x, y, z).
    pub fn link(&self, x: usize, y: usize, z: usize, axis: usize) -> usize {
        3 * self.site_id(x, y, z) + axis
    }

    pub fn link_endpoints(&self) -> &[(usize, usize)] {
        &self.link_endpoints
    }

    /// Octahedra incident to a link, with multiplicity.
    pub fn octahedra_of_link(&self, link: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for (o, slots) in self.octahedra.iter().enumerate() {
            for &s in slots {
                if s == link {
                    out.push(o);
                }
            }
        }
        out
    }
}

pub fn build_cubic(lx: usize, ly: usize, lz: usize) -> Result<CubicLattice> {
    if lx == 0 || ly == 0 || lz == 0 {
        return Err(Error::InvalidLattice(format!(
            "cubic lattice dimensions must be positive, got ({lx},{ly},{lz})"
        )));
    }
    let sites = lx * ly * lz;
    let link_count = 3 * sites;
    let mut lat = CubicLattice {
        dims: (lx, ly, lz),
        link_count,
        octahedra: Vec::with_capacity(sites),
        plaquettes: Vec::new(),
        octahedron_controls: (0..sites).map(|i| link_count + i).collect(),
        plaquette_controls: Vec::new(),
        link_endpoints: vec![(0, 0); link_count],
    };
    for z in 0..lz {
        for y in 0..ly {
            for x in 0..lx {
                let minus = |axis: usize| -> usize {
                    let shift = |v: usize, l: usize| (v + l - 1) % l;
                    match axis {
                        0 => lat.link(shift(x, lx), y, z, 0),
                        1 => lat.link(x, shift(y, ly), z, 1),
                        _ => lat.link(x, y, shift(z, lz), 2),
                    }
                };
                lat.octahedra.push([
                    lat.link(x, y, z, 0),
                    minus(0),
                    lat.link(x, y, z, 1),
                    minus(1),
                    lat.link(x, y, z, 2),
                    minus(2),
                ]);
                for axis in 0..3 {
                    let link = lat.link(x, y, z, axis);
                    lat.link_endpoints[link] = (
                        lat.site_id(x, y, z),
                        match axis {
                            0 => lat.site_id(x + 1, y, z),
                            1 => lat.site_id(x, y + 1, z),
                            _ => lat.site_id(x, y, z + 1),
                        },
                    );
                }
                // Three plaquettes per cell, one per coordinate plane.
                // Ordering is cyclic around the square so that entries
                // 0,2 and 1,3 sit on opposite edges.
                let planes: [[usize; 4]; 3] = [
                    // xy plane
                    [
                        lat.link(x, y, z, 0),
                        lat.link(x + 1, y, z, 1),
                        lat.link(x, y + 1, z, 0),
                        lat.link(x, y, z, 1),
                    ],
                    // yz plane
                    [
                        lat.link(x, y, z, 1),
                        lat.link(x, y + 1, z, 2),
                        lat.link(x, y, z + 1, 1),
                        lat.link(x, y, z, 2),
                    ],
                    // zx plane
                    [
                        lat.link(x, y, z, 2),
                        lat.link(x, y, z + 1, 0),
                        lat.link(x + 1, y, z, 2),
                        lat.link(x, y, z, 0),
                    ],
                ];
                for links in planes {
                    let mut sorted = links;
                    sorted.sort_unstable();
                    let distinct = sorted.windows(2).all(|w| w[0] != w[1]);
                    if distinct {
                        lat.plaquette_controls
                            .push(link_count + sites + lat.plaquettes.len());
                        lat.plaquettes.push(links);
                    }
                }
            }
        }
    }
    Ok(lat)
}

/// Partition of term indices into groups whose gates can run in
/// parallel: no two terms in a group touch links that share a lattice
/// vertex (which also forbids shared links).
#[derive(Debug, Clone)]
pub struct SublatticeColoring {
    pub kind: TermKind,
    pub groups: Vec<Vec<usize>>,
}

impl SublatticeColoring {
    pub fn num_groups(&self) -> usize {
        self.groups.len()
    }

    /// Term indices in group order, flattened; the deterministic sweep
    /// order used by the Trotter scheduler.
    pub fn sweep_order(&self) -> Vec<usize> {
        self.groups.iter().flatten().copied().collect()
    }
}

/// Deterministic greedy coloring over term index order.
///
/// Two terms conflict when any of their links share an endpoint
/// vertex: simultaneously driven control regions must be geometrically
/// separated, which on the torus reproduces the four plaquette
/// sublattices of an L = 4 code.
pub fn color_sublattices(
    kind: TermKind,
    terms: &[Vec<usize>],
    link_endpoints: &[(usize, usize)],
) -> SublatticeColoring {
    let term_vertices: Vec<Vec<usize>> = terms
        .iter()
        .map(|links| {
            let mut vs: Vec<usize> = links
                .iter()
                .flat_map(|&l| {
                    let (a, b) = link_endpoints[l];
                    [a, b]
                })
                .collect();
            vs.sort_unstable();
            vs.dedup();
            vs
        })
        .collect();
    let conflict = |a: usize, b: usize| -> bool {
        terms[a].iter().any(|l| terms[b].contains(l))
            || term_vertices[a]
                .iter()
                .any(|v| term_vertices[b].binary_search(v).is_ok())
    };
    let mut colors: Vec<usize> = Vec::with_capacity(terms.len());
    let mut num_colors = 0usize;
    for t in 0..terms.len() {
        let mut used = vec![false; num_colors];
        for prev in 0..t {
            if conflict(t, prev) {
                used[colors[prev]] = true;
            }
        }
        let color = used.iter().position(|&u| !u).unwrap_or_else(|| {
            num_colors += 1;
            num_colors - 1
        });
        colors.push(color);
    }
    let mut groups = vec![Vec::new(); num_colors];
    for (t, &c) in colors.iter().enumerate() {
        groups[c].push(t);
    }
    SublatticeColoring { kind, groups }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toric_counts() {
        let lat = build_toric(2).unwrap();
        assert_eq!(lat.link_count, 8);
        assert_eq!(lat.plaquettes.len(), 4);
        assert_eq!(lat.vertices.len(), 4);
        let lat = build_toric(3).unwrap();
        assert_eq!(lat.link_count, 18);
        assert_eq!(lat.plaquettes.len(), 9);
    }

    #[test]
    fn toric_rejects_small() {
        assert!(build_toric(1).is_err());
        assert!(build_toric(0).is_err());
    }

    #[test]
    fn each_link_in_two_plaquettes_and_two_vertices() {
        for l in [2, 3, 4, 5] {
            let lat = build_toric(l).unwrap();
            for link in 0..lat.link_count {
                let p = lat
                    .plaquettes
                    .iter()
                    .filter(|links| links.contains(&link))
                    .count();
                let v = lat
                    .vertices
                    .iter()
                    .filter(|links| links.contains(&link))
                    .count();
                assert_eq!((p, v), (2, 2), "link {link} at L={l}");
            }
        }
    }

    #[test]
    fn stabilizer_products_are_identity() {
        let lat = build_toric(3).unwrap();
        let mut prod_p = PauliString::identity(lat.link_count);
        let mut prod_v = PauliString::identity(lat.link_count);
        for p in 0..lat.plaquettes.len() {
            prod_p = prod_p.multiply(&lat.plaquette_stabilizer(p)).unwrap();
            prod_v = prod_v.multiply(&lat.vertex_stabilizer(p)).unwrap();
        }
        assert!(prod_p.is_identity());
        assert_eq!(prod_p.phase(), num_complex::Complex64::ONE);
        assert!(prod_v.is_identity());
    }

    #[test]
    fn stabilizer_families_commute() {
        let lat = build_toric(3).unwrap();
        for p in 0..lat.plaquettes.len() {
            for q in 0..lat.plaquettes.len() {
                let a = lat.plaquette_stabilizer(p);
                assert!(a.commutes(&lat.plaquette_stabilizer(q)).unwrap());
                assert!(a.commutes(&lat.vertex_stabilizer(q)).unwrap());
            }
        }
    }

    #[test]
    fn cubic_counts() {
        let lat = build_cubic(2, 2, 1).unwrap();
        assert_eq!(lat.link_count, 12);
        assert_eq!(lat.octahedra.len(), 4);
        // only the four xy-plane plaquettes survive at Lz = 1
        assert_eq!(lat.plaquettes.len(), 4);
        let lat = build_cubic(2, 2, 2).unwrap();
        assert_eq!(lat.link_count, 24);
        assert_eq!(lat.octahedra.len(), 8);
        assert_eq!(lat.plaquettes.len(), 24);
    }

    #[test]
    fn cubic_rejects_zero_dimension() {
        assert!(build_cubic(2, 0, 2).is_err());
    }

    #[test]
    fn octahedron_slots_cover_each_link_twice() {
        for dims in [(2, 2, 1), (2, 2, 2), (3, 2, 2)] {
            let lat = build_cubic(dims.0, dims.1, dims.2).unwrap();
            let mut counts = vec![0usize; lat.link_count];
            for slots in &lat.octahedra {
                assert_eq!(slots.len(), 6);
                for &l in slots {
                    counts[l] += 1;
                }
            }
            assert!(counts.iter().all(|&c| c == 2), "dims {dims:?}");
        }
    }

    #[test]
    fn cubic_222_octahedra_have_distinct_links() {
        let lat = build_cubic(2, 2, 2).unwrap();
        for slots in &lat.octahedra {
            let mut s = *slots;
            s.sort_unstable();
            assert!(s.windows(2).all(|w| w[0] != w[1]));
        }
    }

    #[test]
    fn cubic_221_doubles_exactly_the_z_slot() {
        let lat = build_cubic(2, 2, 1).unwrap();
        for slots in &lat.octahedra {
            let mut s = *slots;
            s.sort_unstable();
            let dups = s.windows(2).filter(|w| w[0] == w[1]).count();
            assert_eq!(dups, 1);
            // the doubled slot is the z-axis link
            let dup = s.windows(2).find(|w| w[0] == w[1]).unwrap()[0];
            assert_eq!(dup % 3, 2);
        }
    }

    #[test]
    fn plaquette_coloring_l4_has_four_groups() {
        let lat = build_toric(4).unwrap();
        let terms: Vec<Vec<usize>> = lat.plaquettes.iter().map(|p| p.to_vec()).collect();
        let coloring = color_sublattices(TermKind::Plaquette, &terms, lat.link_endpoints());
        assert_eq!(coloring.num_groups(), 4);
        assert_valid(&coloring, &terms);
    }

    #[test]
    fn vertex_coloring_l2_partitions_all_vertices() {
        let lat = build_toric(2).unwrap();
        let terms: Vec<Vec<usize>> = lat.vertices.iter().map(|v| v.to_vec()).collect();
        let coloring = color_sublattices(TermKind::Vertex, &terms, lat.link_endpoints());
        let mut seen: Vec<usize> = coloring.groups.iter().flatten().copied().collect();
        seen.sort_unstable();
        assert_eq!(seen, vec![0, 1, 2, 3]);
    }

    #[test]
    fn cubic_plaquette_coloring_valid() {
        let lat = build_cubic(2, 2, 2).unwrap();
        let terms: Vec<Vec<usize>> = lat.plaquettes.iter().map(|p| p.to_vec()).collect();
        let coloring = color_sublattices(TermKind::Plaquette, &terms, lat.link_endpoints());
        assert_valid(&coloring, &terms);
    }

    /// Exhaustive pairwise link-disjointness within every group.
    fn assert_valid(coloring: &SublatticeColoring, terms: &[Vec<usize>]) {
        let mut seen: Vec<usize> = coloring.groups.iter().flatten().copied().collect();
        seen.sort_unstable();
        assert_eq!(seen, (0..terms.len()).collect::<Vec<_>>());
        for group in &coloring.groups {
            for (i, &a) in group.iter().enumerate() {
                for &b in &group[i + 1..] {
                    assert!(
                        !terms[a].iter().any(|l| terms[b].contains(l)),
                        "terms {a} and {b} share a link"
                    );
                }
            }
        }
    }
}
