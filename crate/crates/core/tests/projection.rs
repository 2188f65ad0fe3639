use emberank::project::{
    default_color_map, joint_probabilities, project_vectors, render_scatter, ProjectedPoint,
    ProjectionConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random(n: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect()
}

#[test]
fn duplicated_point_lands_next_to_its_twin() {
    let mut pts = random(40, 10, 1);
    pts.push(pts[0].clone());
    let cfg = ProjectionConfig {
        perplexity: 8.0,
        ..ProjectionConfig::default()
    };
    let out = project_vectors(&pts, &cfg).unwrap();
    let y = &out.embedding;
    let d = |i: usize, j: usize| ((y[i][0] - y[j][0]).powi(2) + (y[i][1] - y[j][1]).powi(2)).sqrt();
    let twin = d(0, 40);
    let mut all: Vec<f64> = (0..y.len()).flat_map(|i| (i + 1..y.len()).map(move |j| (i, j))).map(|(i, j)| d(i, j)).collect();
    all.sort_by(f64::total_cmp);
    let cutoff = all[all.len() * 5 / 100];
    assert!(twin <= cutoff, "{twin} vs 5% cutoff {cutoff}");
}

#[test]
fn p_is_normalized() {
    for seed in 0..5 {
        let p = joint_probabilities(&random(30, 4, seed), 5.0).unwrap();
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn svg_is_well_formed() {
    let pts: Vec<ProjectedPoint> = (0..12)
        .map(|i| ProjectedPoint {
            journal_id: format!("j<{i}>&"),
            x: i as f64,
            y: (i * i) as f64,
            publisher: ["Wiley", "Elsevier", "Springer-Nature", "Other"][i % 4].into(),
            n_docs: i,
        })
        .collect();
    let svg = render_scatter(&pts, &default_color_map(), 5);
    let doc = roxmltree::Document::parse(&svg).unwrap();
    let root = doc.root_element();
    assert_eq!(root.attribute("width"), Some("1000"));
    assert_eq!(root.attribute("height"), Some("800"));
    let circles: Vec<_> = doc.descendants().filter(|n| n.has_tag_name("circle")).collect();
    assert_eq!(circles.len(), 12);
    for c in &circles {
        let cx: f64 = c.attribute("cx").unwrap().parse().unwrap();
        let cy: f64 = c.attribute("cy").unwrap().parse().unwrap();
        assert!((50.0..=950.0).contains(&cx) && (40.0..=760.0).contains(&cy));
    }
    let fills: Vec<_> = circles.iter().map(|c| c.attribute("fill").unwrap()).collect();
    assert_eq!(&fills[..4], &["red", "green", "blue", "gray"]);
    assert_eq!(doc.descendants().filter(|n| n.has_tag_name("text")).count(), 5);
}

#[test]
fn one_publisher_one_fill() {
    let pts: Vec<ProjectedPoint> = (0..6)
        .map(|i| ProjectedPoint {
            journal_id: format!("j{i}"),
            x: i as f64,
            y: -(i as f64),
            publisher: "Elsevier".into(),
            n_docs: 1,
        })
        .collect();
    let svg = render_scatter(&pts, &default_color_map(), 0);
    assert_eq!(svg.matches(r#"fill="green""#).count(), 6);
}
