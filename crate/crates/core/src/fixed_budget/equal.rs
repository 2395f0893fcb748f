use crate::error::{Error, Result};
use crate::model::{argmax, RunningStat, Sampler, SelectionResult, Termination};

/// Baseline: `total` samples spread evenly (lowest indices take the
/// remainder), then the largest sample mean.
pub fn equal_allocation(total: u64, sampler: &mut Sampler) -> Result<SelectionResult> {
    let k = sampler.k() as u64;
    if total < k {
        return Err(Error::config(
            "procedure.budget",
            format!("must give every alternative one sample, got {total} for k = {k}"),
        ));
    }
    let means: Vec<f64> = (0..k)
        .map(|i| {
            let n = total / k + u64::from(i < total % k);
            RunningStat::from_slice(&sampler.draw_n(i as usize, n)).mean()
        })
        .collect();
    Ok(SelectionResult::new(argmax(&means), sampler.counts(), Termination::Decision))
}
