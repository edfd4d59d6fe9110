//! Keep the reviews that talk about the same thing as the blurb.

use higemine::embeddings::HashingEncoder;
use higemine::review_filter::{filter_reviews, FilterConfig};

fn main() -> higemine::Result<()> {
    let blurb = "A young detective investigates a murder in a small harbour town, \
                 where every fisherman hides a secret and the fog never lifts from \
                 the docks during the long cold winter nights";
    let reviews = vec![
        "The murder plot kept me guessing and the detective felt real".to_string(),
        "Shipping was slow and the box arrived damaged".to_string(),
        "Great harbour atmosphere, the fog and the docks are vivid".to_string(),
    ];
    let encoder = HashingEncoder::new(64)?;
    let cfg = FilterConfig {
        min_blurb_tokens: 10,
        ..FilterConfig::default()
    };
    let r = filter_reviews(blurb, &reviews, &encoder, &cfg)?;
    for (i, (text, sim)) in reviews.iter().zip(&r.similarities).enumerate() {
        let mark = if r.kept_indices.contains(&i) { "keep" } else { "drop" };
        println!("{mark} {sim:.3}  {text}");
    }
    println!("threshold {:?}", r.threshold_used);

    // Too short to anchor anything: every review passes through.
    let r = filter_reviews("A thriller", &reviews, &encoder, &cfg)?;
    println!("short blurb bypass={} kept={:?}", r.bypass, r.kept_indices);
    Ok(())
}
