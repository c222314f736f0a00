//! Independent oracles and generators for tests.
//!
//! Nothing here calls into the code paths it is used to check: the regex
//! matcher has its own parser, the interpreter walks syntax trees instead of
//! control flow graphs, and the dataflow oracles restate each analysis.

pub mod cfg_gen;
pub mod dataflow;
pub mod interp;
pub mod program_gen;
pub mod regex_gen;
pub mod regex_oracle;
pub mod slice_gen;
pub mod suites;
pub mod taint;

use rand::rngs::StdRng;
use rand::SeedableRng;

/// Deterministic generator for reproducible property runs.
pub fn seeded(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// The bundled corpus variant, `buggy` or `fixed`.
pub fn corpus_dir(variant: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(variant)
}

const STRING_CHARS: [char; 6] = ['a', 'b', 'z', '9', '-', 'A'];

/// A small random value of type `ty`.
pub fn random_value(rng: &mut impl rand::Rng, ty: pcw_core::lang::Type) -> pcw_core::symexec::Value {
    use pcw_core::lang::Type;
    use pcw_core::symexec::Value;
    match ty {
        Type::Int => Value::Int(rng.random_range(-6..16).into()),
        Type::Bool => Value::Bool(rng.random_bool(0.5)),
        Type::String => {
            let len = rng.random_range(0..5);
            Value::Str((0..len).map(|_| STRING_CHARS[rng.random_range(0..STRING_CHARS.len())]).collect())
        }
    }
}
