mod common;

use common::{gradient_error, model, samples, scene};
use maad_core::Subclass;
use maad_diffcalc::{Linear, LstmCell, LstmState, ParamStore, Tensor};
use maad_models::layers::{normalized_row, Aggregation, GraphConv, LaneFusion, LaneInputs};
use maad_models::{Architecture, Objective, Sample};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOLERANCE: f64 = 1e-4;

fn random(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Tensor {
    Tensor::new(rows, cols, (0..rows * cols).map(|_| rng.gen_range(-1.0..1.0)).collect())
}

fn random_biases(store: &mut ParamStore, rng: &mut ChaCha8Rng) {
    for p in store.iter_mut() {
        if p.name.ends_with("bias") {
            p.value.data_mut().iter_mut().for_each(|v| *v = rng.gen_range(-0.5..0.5));
        }
    }
}

#[test]
fn linear_layer_gradients() {
    for seed in 0..10 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut store = ParamStore::new();
        let layer = Linear::new(&mut store, "fc", 5, 3, &mut rng);
        random_biases(&mut store, &mut rng);
        let (x, y) = (random(4, 5, &mut rng), random(4, 3, &mut rng));
        let err = gradient_error(&mut store, |g, s| {
            let xv = g.constant(x.clone());
            let out = layer.forward(g, s, xv).unwrap();
            let t = g.constant(y.clone());
            let se = g.squared_euclidean(out, t).unwrap();
            g.mean(se)
        });
        assert!(err < TOLERANCE, "seed {seed}: {err}");
    }
}

#[test]
fn lstm_cell_gradients_through_time() {
    for seed in 0..10 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut store = ParamStore::new();
        let cell = LstmCell::new(&mut store, "lstm", 3, 4, &mut rng);
        random_biases(&mut store, &mut rng);
        let xs: Vec<Tensor> = (0..5).map(|_| random(2, 3, &mut rng)).collect();
        let (h0, c0) = (random(2, 4, &mut rng), random(2, 4, &mut rng));
        let err = gradient_error(&mut store, |g, s| {
            let mut st = LstmState { h: g.constant(h0.clone()), c: g.constant(c0.clone()) };
            for x in &xs {
                let xv = g.constant(x.clone());
                st = cell.forward(g, s, xv, st).unwrap();
            }
            let both = g.concat_cols(&[st.h, st.c]).unwrap();
            let sq = g.mul(both, both).unwrap();
            g.sum(sq)
        });
        assert!(err < TOLERANCE, "seed {seed}: {err}");
    }
}

#[test]
fn graph_convolution_gradients() {
    for seed in 0..10 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut store = ParamStore::new();
        let conv = GraphConv::new(&mut store, "gc", 6, &mut rng);
        // two scenes of 3 and 4 agents, one padded
        let h = random(7, 6, &mut rng);
        let mut points: Vec<Option<[f64; 2]>> = (0..7).map(|_| Some([rng.gen_range(-20.0..20.0), rng.gen_range(-5.0..5.0)])).collect();
        points[5] = None;
        let mut agg = Aggregation::new(2);
        for (k, w) in normalized_row(&points[0..3], 0) {
            agg.push(k, 0, w);
        }
        for (k, w) in normalized_row(&points[3..7], 1) {
            agg.push(3 + k, 1, w);
        }
        let target = random(2, 6, &mut rng);
        let err = gradient_error(&mut store, |g, s| {
            let hv = g.constant(h.clone());
            let out = conv.forward(g, s, hv, &agg, &[0, 4]).unwrap();
            let t = g.constant(target.clone());
            let se = g.squared_euclidean(out, t).unwrap();
            g.sum(se)
        });
        assert!(err < TOLERANCE, "seed {seed}: {err}");
    }
}

#[test]
fn lane_fusion_gradients() {
    for seed in 0..10 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut store = ParamStore::new();
        let fusion = LaneFusion::new(&mut store, "lane", 5, &mut rng);
        random_biases(&mut store, &mut rng);
        let nodes = 6;
        let mut connectivity = Aggregation::new(nodes);
        for i in 0..nodes - 1 {
            connectivity.push(i + 1, i, 0.5);
            connectivity.push(i, i + 1, 0.5);
        }
        let edge_nodes = vec![0, 1, 2, 2, 4, 5];
        let mut to_actor = Aggregation::new(3);
        for (e, a) in [0, 0, 0, 1, 1, 2].into_iter().enumerate() {
            to_actor.push(e, a, [1.0 / 3.0, 0.5, 1.0][a]);
        }
        let lanes = LaneInputs {
            node_features: random(nodes, 4, &mut rng),
            connectivity,
            offsets: random(edge_nodes.len(), 2, &mut rng),
            edge_nodes,
            to_actor,
        };
        let actors = random(3, 5, &mut rng);
        let target = random(3, 5, &mut rng);
        let err = gradient_error(&mut store, |g, s| {
            let a = g.constant(actors.clone());
            let out = fusion.forward(g, s, a, &lanes).unwrap();
            let t = g.constant(target.clone());
            let se = g.squared_euclidean(out, t).unwrap();
            g.sum(se)
        });
        assert!(err < TOLERANCE, "seed {seed}: {err}");
    }
}

fn full_model_error(arch: Architecture, objective: Objective, seed: u64) -> f64 {
    let sc = scene(Subclass::Following, seed, 3.0);
    let batch: Vec<Sample> = samples(&sc, &[15, 22, 29]);
    let refs: Vec<&Sample> = batch.iter().collect();
    let mut m = model(arch, objective, seed);
    // zero biases put relu inputs exactly on the kink
    random_biases(&mut m.store, &mut ChaCha8Rng::seed_from_u64(seed));
    if objective == Objective::Dsvdd {
        let c = maad_models::init_center(&m, &batch).unwrap();
        m.descriptor.dsvdd_center = Some(c.iter().map(|v| v + 0.05).collect());
    }
    let mut store = m.store.clone();
    gradient_error(&mut store, |g, s| {
        let out = m.forward_with(g, s, &refs).unwrap();
        let l_r = m.recon_loss(g, &out).unwrap();
        match objective {
            Objective::Recon => l_r,
            Objective::Dsvdd => {
                let l_a = m.dsvdd_loss(g, &out).unwrap();
                g.add(l_r, l_a).unwrap()
            }
        }
    })
}

#[test]
fn seq2seq_reconstruction_loss_gradients() {
    let err = full_model_error(Architecture::Seq2Seq, Objective::Recon, 1);
    assert!(err < TOLERANCE, "{err}");
}

#[test]
fn stgae_joint_loss_gradients() {
    let err = full_model_error(Architecture::Stgae, Objective::Dsvdd, 2);
    assert!(err < TOLERANCE, "{err}");
}

#[test]
fn lanegcn_reconstruction_loss_gradients() {
    let err = full_model_error(Architecture::LanegcnAe, Objective::Recon, 3);
    assert!(err < TOLERANCE, "{err}");
}
