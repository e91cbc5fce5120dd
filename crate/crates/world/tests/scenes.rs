use synergy_world::scene::basket_range;
use synergy_world::{generate_scene, SceneSnapshot, Task, WorldConfig};

#[test]
fn baskets_respect_the_sampling_annulus() {
    let cfg = WorldConfig::default();
    for task in [Task::Task2, Task::Task3] {
        let (lo, hi) = basket_range(task);
        for seed in 0..1000 {
            let scene = generate_scene(task, seed, &cfg).unwrap();
            let d = scene.basket_distance() / cfg.arm.reach;
            assert!(d >= lo - 1e-12 && d <= hi + 1e-12, "{task:?} seed {seed}: {d}");
            let az = (scene.basket.y - scene.arm_base.y).atan2(scene.basket.x - scene.arm_base.x);
            assert!(az.abs() <= std::f64::consts::FRAC_PI_6 + 1e-12);
        }
    }
    for seed in 0..200 {
        let scene = generate_scene(Task::Task1, seed, &cfg).unwrap();
        assert!(scene.basket_distance() <= cfg.arm.reach + 1e-12);
    }
}

#[test]
fn generation_is_deterministic_and_serialisable() {
    let cfg = WorldConfig::default();
    for task in [Task::Task1, Task::Task2, Task::Task3] {
        for seed in [0, 1, 77, u64::MAX] {
            let a = generate_scene(task, seed, &cfg).unwrap();
            assert_eq!(a, generate_scene(task, seed, &cfg).unwrap());
            let json = SceneSnapshot::new(a.clone()).to_json().unwrap();
            assert_eq!(SceneSnapshot::from_json(&json).unwrap().scene, a);
        }
    }
    let a = generate_scene(Task::Task1, 1, &cfg).unwrap();
    let b = generate_scene(Task::Task1, 2, &cfg).unwrap();
    assert_ne!(a, b);
}

#[test]
fn held_object_for_throw_only_scenes() {
    let cfg = WorldConfig::default();
    let scene = generate_scene(Task::Task2, 9, &cfg).unwrap();
    assert!(scene.objects.is_empty());
    assert_eq!(scene.held.unwrap().id, scene.target_id);
}
