use mimicface_web::Demo;

#[test]
fn render_detect_and_mask_agree_on_the_frame() {
    let demo = Demo::new();
    let (w, h) = (demo.width(), demo.height());
    let levels = demo.random_levels(3);
    assert_eq!(levels.len(), demo.motors());
    assert!(levels.iter().all(|&l| (l as usize) < demo.levels()));

    let pixels = demo.render(&levels).unwrap();
    assert_eq!(pixels.len(), 4 * w * h);
    assert!(pixels.chunks_exact(4).all(|p| p[3] == 255));

    let d = demo.detect(&levels).unwrap();
    assert_eq!(d.positions().len(), 2 * 53);
    assert_eq!(d.truth().len(), 2 * 53);
    assert!(d.error() < 0.5, "{}", d.error());

    let mask = demo.mask(&levels).unwrap();
    assert_eq!(mask.len(), 4 * w * h);
    let occupied = mask.chunks_exact(4).filter(|p| p[0] == 255).count();
    assert!((40..=53).contains(&occupied), "{occupied}");
}

#[test]
fn wrong_motor_count_is_reported() {
    let demo = Demo::new();
    let err = demo.render(&[0, 1]).err().unwrap();
    assert!(err.contains("motor levels"), "{err}");
    assert!(demo.render(&[9; 10]).is_err());
}

#[test]
fn neutral_command_is_deterministic() {
    let demo = Demo::new();
    let zero = vec![0; demo.motors()];
    assert_eq!(demo.render(&zero).unwrap(), demo.render(&zero).unwrap());
    assert_eq!(demo.random_levels(8), demo.random_levels(8));
}
