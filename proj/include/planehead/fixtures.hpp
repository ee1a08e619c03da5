#pragma once

#include "planehead/mesh.hpp"
#include "planehead/metrics.hpp"

#include <filesystem>
#include <vector>

namespace planehead::fixtures {

// Unit cube [0,1]^3, 8 vertices, 12 outward-facing triangles.
Mesh cube();
// Region per cube face (1..6), in the triangle order of cube().
RegionLabeling cube_face_labels();

// Regular n x n grid over [x0, x0 + size] x [y0, y0 + size] at z = 0.
Mesh grid(int n, double size = 1.0, double x0 = 0.0, double y0 = 0.0);

// Two unit squares sharing the edge x = 0 (left: x in [-1,0], right: [0,1]), each an
// n x n grid, folded about the y axis so the dihedral opening is `fold_degrees`
// (0: coplanar). Region 1 is the left square, region 2 the right one.
struct Hinge {
    Mesh mesh;
    RegionLabeling labels;
};
Hinge hinge(int n = 8, double fold_degrees = 30.0);

// UV sphere of radius 1 with rings * segments + 2 vertices.
Mesh uv_sphere(int rings, int segments);
// Icosahedron subdivided `levels` times and projected to the unit sphere.
Mesh icosphere(int levels);

// Synthetic head: a height field over a (nx x ny) grid with brow ridge, eye
// sockets, nose, cheeks, lips and chin. Faces outside the face ellipse are label
// 0; the rest are split into K symmetric regions (Voronoi cells of fixed seeds).
struct Face {
    Mesh mesh;
    RegionLabeling labels;
    LandmarkSet landmarks;
};
// Default grid gives 30000 vertices. K must be in [1, 32].
Face face(int nx = 150, int ny = 200, int K = 32);
// Height of the synthetic head at (x, y).
double face_height(double x, double y);

// Writes cube.obj, cube_labels.json, hinge.obj, hinge_labels.json, sphere30k.ply,
// face.ply, face_labels.json, face_landmarks.json, template.ply,
// template_labels.json into `dir`.
void write_all(const std::filesystem::path& dir);

}  // namespace planehead::fixtures
