use nhplan::error::GridError;
use nhplan::grid::{Cell, OccupancyGrid};
use proptest::prelude::*;

fn grid_strategy() -> impl Strategy<Value = OccupancyGrid> {
    (1usize..24, 1usize..24, 0.05f64..2.0, -50.0f64..50.0, -50.0f64..50.0).prop_flat_map(|(w, h, res, ox, oy)| {
        prop::collection::vec(prop::bool::weighted(0.2), w * h)
            .prop_map(move |cells| OccupancyGrid::from_cells(w, h, res, [ox, oy], cells).unwrap())
    })
}

fn cells(g: &OccupancyGrid) -> impl Iterator<Item = Cell> + '_ {
    (0..g.height()).flat_map(move |j| (0..g.width()).map(move |i| Cell::new(i, j)))
}

proptest! {
    #[test]
    fn text_round_trip(g in grid_strategy()) {
        prop_assert_eq!(OccupancyGrid::parse(&g.to_text()).unwrap(), g);
    }

    #[test]
    fn cell_centers_map_back_to_their_cell(g in grid_strategy()) {
        for c in cells(&g) {
            prop_assert_eq!(g.world_to_cell(g.cell_to_world(c)), Some(c));
        }
    }

    #[test]
    fn points_off_the_grid_are_occupied(g in grid_strategy(), fx in -1.0f64..2.0, fy in -1.0f64..2.0) {
        let [x0, y0, x1, y1] = g.bounds();
        let p = [x0 + fx * (x1 - x0), y0 + fy * (y1 - y0)];
        if !(0.0..1.0).contains(&fx) || !(0.0..1.0).contains(&fy) {
            prop_assert!(g.is_occupied(p));
            prop_assert_eq!(g.world_to_cell(p), None);
        }
    }

    // Brute-force oracle: a cell is occupied after inflation iff its center lies within
    // `radius` of some occupied cell center.
    #[test]
    fn inflation_matches_brute_force(g in grid_strategy(), k in 0.0f64..4.0) {
        let radius = k * g.resolution();
        let out = g.inflate(radius).unwrap();
        let occupied: Vec<[f64; 2]> = cells(&g).filter(|&c| g.cell_occupied(c)).map(|c| g.cell_to_world(c)).collect();
        for c in cells(&g) {
            let p = g.cell_to_world(c);
            let near = occupied.iter().any(|q| (p[0] - q[0]).hypot(p[1] - q[1]) <= radius * (1.0 + 1e-9));
            prop_assert_eq!(out.cell_occupied(c), near, "cell {:?}", c);
        }
    }

    #[test]
    fn inflation_is_monotone_in_radius(g in grid_strategy(), a in 0.0f64..3.0, b in 0.0f64..3.0) {
        let (small, large) = (a.min(b) * g.resolution(), a.max(b) * g.resolution());
        let s = g.inflate(small).unwrap();
        let l = g.inflate(large).unwrap();
        for c in cells(&g) {
            prop_assert!(!s.cell_occupied(c) || l.cell_occupied(c));
            prop_assert!(!g.cell_occupied(c) || s.cell_occupied(c));
        }
    }
}

#[test]
fn first_payload_row_is_lowest_y() {
    let g = OccupancyGrid::parse("GRID 3 2 0.5 1 2\n1 0 0\n0 0 1\n").unwrap();
    assert!(g.is_occupied([1.1, 2.1]));
    assert!(!g.is_occupied([1.1, 2.6]));
    assert!(g.is_occupied([2.4, 2.6]));
    assert_eq!(g.bounds(), [1.0, 2.0, 2.5, 3.0]);
}

#[test]
fn shared_edges_belong_to_the_higher_cell() {
    let g = OccupancyGrid::new(4, 4, 0.25, [0.0, 0.0]).unwrap();
    assert_eq!(g.world_to_cell([0.25, 0.5]), Some(Cell::new(1, 2)));
    assert_eq!(g.world_to_cell([1.0, 0.0]), None);
}

#[test]
fn comments_and_blank_lines_are_skipped() {
    let g = OccupancyGrid::parse("# map\n\nGRID 2 1 1 0 0\n# row 0\n0 1\n").unwrap();
    assert_eq!(g.occupied_count(), 1);
}

#[test]
fn malformed_text_reports_the_line() {
    let cases = [
        ("", 1),
        ("GRIDS 1 1 1 0 0\n0\n", 1),
        ("GRID 2 1 1 0 0\n0 1 0\n", 2),
        ("GRID 2 2 1 0 0\n0 1\n", 2),
        ("GRID 1 1 1 0 0\n0\n1\n", 3),
        ("GRID 1 1 1 0 0\nx\n", 2),
        ("GRID 1 1 z 0 0\n0\n", 1),
    ];
    for (text, line) in cases {
        match OccupancyGrid::parse(text) {
            Err(GridError::Format { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
            other => panic!("{text:?}: {other:?}"),
        }
    }
}

#[test]
fn invalid_geometry_is_rejected() {
    assert!(matches!(OccupancyGrid::parse("GRID 0 0 1 0 0\n"), Err(GridError::InvalidDimensions { .. })));
    assert!(matches!(OccupancyGrid::parse("GRID 1 1 0 0 0\n0\n"), Err(GridError::InvalidResolution(_))));
    assert!(matches!(OccupancyGrid::parse("GRID 1 1 1 nan 0\n0\n"), Err(GridError::InvalidOrigin)));
    let g = OccupancyGrid::new(2, 2, 1.0, [0.0, 0.0]).unwrap();
    assert!(matches!(g.inflate(-1.0), Err(GridError::NegativeRadius(_))));
}

#[test]
fn load_reports_missing_files() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(OccupancyGrid::load(dir.path().join("none.grid")), Err(GridError::Io { .. })));
}

#[test]
fn span_check_covers_the_cell_box() {
    let mut g = OccupancyGrid::new(10, 10, 1.0, [0.0, 0.0]).unwrap();
    g.set_occupied(Cell::new(5, 2), true);
    assert!(!g.span_is_free([1.5, 1.5], [7.5, 3.5]));
    assert!(g.span_is_free([1.5, 3.5], [7.5, 6.5]));
    assert!(!g.span_is_free([1.5, 1.5], [11.0, 1.5]));
}
