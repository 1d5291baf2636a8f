//! Every encoder applied to one categorical column with a binary target.

use tabenc::encoders::{EncoderKind, EncoderSpec, FittedEncoder};

fn main() -> tabenc::Result<()> {
    let x: Vec<String> = ["paris", "paris", "berlin", "rome", "paris", "berlin", "oslo", "rome"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let y = [1.0, 1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0];
    for kind in EncoderKind::ALL {
        let mut spec = EncoderSpec::new(kind);
        spec.rare_threshold = 0.15;
        let enc = FittedEncoder::fit(&spec, "city", &x, Some(&y))?;
        println!("{kind} -> {:?}", enc.output_names());
        for level in ["paris", "oslo", "madrid"] {
            let v: Vec<String> = enc.encode(level).iter().map(|v| format!("{v:.3}")).collect();
            println!("  {level:<7} [{}]", v.join(", "));
        }
    }
    Ok(())
}
