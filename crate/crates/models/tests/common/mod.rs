#![allow(dead_code)]

use maad_core::{Scene, Subclass};
use maad_datagen::{generate_scene, world_for, ManeuverScript, SceneSettings};
use maad_diffcalc::{Graph, ParamStore, Var};
use maad_models::{Architecture, DeepModel, ModelDescriptor, Normalization, Objective, Sample};

pub fn scene(subclass: Subclass, seed: u64, duration_s: f64) -> Scene {
    let mut settings = SceneSettings::new(format!("{}_{seed}", subclass.name()), duration_s);
    settings.random_pose = true;
    generate_scene(&world_for(subclass, seed), &ManeuverScript::new(subclass), &settings, seed).unwrap()
}

/// A few unlabeled normal scenes of mixed classes.
pub fn normal_scenes(n: usize, seed: u64) -> Vec<Scene> {
    let classes: Vec<Subclass> = Subclass::normal().collect();
    (0..n)
        .map(|i| {
            let mut s = scene(classes[i % classes.len()], seed * 1000 + i as u64, 3.0);
            s.labels = None;
            s
        })
        .collect()
}

pub fn samples(scene: &Scene, frames: &[usize]) -> Vec<Sample> {
    frames.iter().map(|&f| Sample::from_scene(scene, f).unwrap()).collect()
}

pub fn model(arch: Architecture, objective: Objective, seed: u64) -> DeepModel {
    let norm = Normalization { position_scale: 7.0, displacement_scale: 0.9 };
    DeepModel::new(ModelDescriptor::new(arch, objective).unwrap(), norm, seed).unwrap()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Norm-wise relative error between backpropagated gradients and central
/// finite differences (step 1e-5) of `loss` over every value in `store`.
pub fn gradient_error(store: &mut ParamStore, loss: impl Fn(&mut Graph, &ParamStore) -> Var) -> f64 {
    store.zero_grad();
    let mut g = Graph::new();
    let l = loss(&mut g, store);
    g.backward(l, store).unwrap();
    let analytic = store.grads_flat();
    let eps = 1e-5;
    let mut numeric = Vec::with_capacity(analytic.len());
    for k in 0..analytic.len() {
        let orig = *store.flat_value_mut(k);
        let eval = |v: f64, store: &mut ParamStore| {
            *store.flat_value_mut(k) = v;
            let mut g = Graph::new();
            let l = loss(&mut g, store);
            g.value(l).item()
        };
        let fp = eval(orig + eps, store);
        let fm = eval(orig - eps, store);
        *store.flat_value_mut(k) = orig;
        numeric.push((fp - fm) / (2.0 * eps));
    }
    let diff: Vec<f64> = analytic.iter().zip(&numeric).map(|(a, b)| a - b).collect();
    norm(&diff) / norm(&analytic).max(norm(&numeric)).max(1e-12)
}
