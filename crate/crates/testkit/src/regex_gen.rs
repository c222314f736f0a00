//! Random regex patterns over a small alphabet.

use rand::Rng;

/// Characters patterns are built from.
pub const PATTERN_CHARS: [char; 3] = ['a', 'b', '-'];
/// Characters test strings are built from; `z` never occurs literally in a
/// pattern, so it only matches through `.` and negated classes.
pub const TEST_CHARS: [char; 4] = ['a', 'b', '-', 'z'];

const CLASSES: [&str; 6] = ["[ab]", "[^a]", "[a-b]", "[-a]", "[^-b]", "."];

fn atom(rng: &mut impl Rng) -> String {
    if rng.random_bool(0.6) {
        PATTERN_CHARS[rng.random_range(0..PATTERN_CHARS.len())].to_string()
    } else {
        CLASSES[rng.random_range(0..CLASSES.len())].to_string()
    }
}

fn node(rng: &mut impl Rng, depth: u32) -> String {
    if depth == 0 || rng.random_bool(0.3) {
        return atom(rng);
    }
    match rng.random_range(0..6) {
        0 | 1 => (0..rng.random_range(2..=3)).map(|_| node(rng, depth - 1)).collect(),
        2 => format!("({}|{})", node(rng, depth - 1), node(rng, depth - 1)),
        _ => {
            let quant = match rng.random_range(0..5) {
                0 => "*".to_string(),
                1 => "+".to_string(),
                2 => "?".to_string(),
                3 => {
                    let min = rng.random_range(0..=2);
                    format!("{{{min},{}}}", min + rng.random_range(0..=2))
                }
                _ => format!("{{{}}}", rng.random_range(1..=2)),
            };
            format!("({}){quant}", node(rng, depth - 1))
        }
    }
}

/// A pattern of nesting depth at most 4.
pub fn random_pattern(rng: &mut impl Rng) -> String {
    node(rng, 4)
}

/// Every string over `alphabet` of length at most `max_len`, shortest first.
pub fn all_strings(alphabet: &[char], max_len: usize) -> Vec<String> {
    let mut out = vec![String::new()];
    let mut layer = vec![String::new()];
    for _ in 0..max_len {
        layer = layer
            .iter()
            .flat_map(|s| {
                alphabet.iter().map(move |c| {
                    let mut t = s.clone();
                    t.push(*c);
                    t
                })
            })
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}
