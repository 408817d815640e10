use greenpinn::autodiff::Activation;
use greenpinn::network::*;
fn main() {
    for spec in [
        NetworkSpec { arch: Arch::Mmnn, input_dim: 2, width: 12, depth: 3, rank: Some(4), activation: Activation::Sine, first_layer_scale: 1.0 },
        NetworkSpec { arch: Arch::Fcnn, input_dim: 1, width: 10, depth: 2, rank: None, activation: Activation::Sine, first_layer_scale: 1.0 },
        NetworkSpec { arch: Arch::Fcnn, input_dim: 1, width: 10, depth: 2, rank: None, activation: Activation::Tanh, first_layer_scale: 1.0 },
    ] {
        let params = init_params(&spec, 3);
        let mut diverged = 0;
        for k in 0..2000 {
            let x: Vec<f64> = (0..spec.input_dim).map(|a| -1.0 + 0.001 * k as f64 + 0.3 * a as f64).collect();
            let v = forward(&params, &spec, &x);
            let j = forward_jets(&params, &spec, &x);
            if v.to_bits() != j.u.to_bits() { diverged += 1; }
        }
        println!("{:?} diverged: {diverged}/2000", spec.arch);
    }
}
