//! Serialise a model to the binary checkpoint format and restore it.

use higemine::checkpoint::{Checkpoint, CheckpointMeta};
use higemine::model::{Level1Model, Parameters, PathDims};

fn main() -> higemine::Result<()> {
    let model = Level1Model::new(
        PathDims {
            input: 8,
            gcn1: 6,
            gcn2: 4,
            hidden: 4,
            output: 1,
        },
        42,
    )?;
    let ckpt = Checkpoint::from_model(&model, CheckpointMeta::Level1 { dims: model.dims }, 0xfeed);
    let bytes = ckpt.to_bytes()?;
    println!("{} parameters, {} bytes", model.parameter_count(), bytes.len());
    let restored = Checkpoint::from_bytes(&bytes)?.level1_model()?;
    println!("identical after round trip: {}", restored == model);

    let mut corrupt = bytes.clone();
    corrupt[0] = b'X';
    println!("bad magic: {}", Checkpoint::from_bytes(&corrupt).unwrap_err());
    Ok(())
}
