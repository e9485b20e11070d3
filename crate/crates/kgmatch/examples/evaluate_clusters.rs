//! Score predicted clusterings against gold labels and aggregate fold
//! results the way the consolidated tables do.

use kgmatch::evaluation::{
    accuracy, adjusted_rand_index, cross_validated_report, format_mean_std,
    normalized_mutual_information, FoldMetrics,
};

fn main() -> kgmatch::Result<()> {
    let gold = vec![0, 0, 0, 1, 1, 1, 2, 2];
    let cases: Vec<(&str, Vec<u32>)> = vec![
        ("perfect (renamed labels)", vec![2, 2, 2, 0, 0, 0, 1, 1]),
        ("one node astray", vec![0, 0, 0, 1, 1, 0, 2, 2]),
        ("everything merged", vec![0, 0, 0, 0, 0, 0, 0, 0]),
        ("all singletons", vec![0, 1, 2, 3, 4, 5, 6, 7]),
    ];
    println!("{:<26} {:>6} {:>8} {:>6}", "prediction", "ACC", "ARI", "NMI");
    for (name, pred) in &cases {
        println!(
            "{name:<26} {:>6.3} {:>8.3} {:>6.3}",
            accuracy(pred, &gold)?,
            adjusted_rand_index(pred, &gold)?,
            normalized_mutual_information(pred, &gold)?
        );
    }

    let per_fold = vec![
        FoldMetrics { acc: 0.91, ari: 0.80, nmi: 0.88 },
        FoldMetrics { acc: 0.95, ari: 0.85, nmi: 0.90 },
        FoldMetrics { acc: 0.89, ari: 0.78, nmi: 0.87 },
        FoldMetrics { acc: 0.93, ari: 0.82, nmi: 0.91 },
        FoldMetrics { acc: 0.92, ari: 0.81, nmi: 0.89 },
    ];
    let report = cross_validated_report(&per_fold)?;
    println!(
        "\n5-fold aggregate: ACC {}, ARI {}, NMI {}",
        format_mean_std(report.mean.acc, report.std.acc),
        format_mean_std(report.mean.ari, report.std.ari),
        format_mean_std(report.mean.nmi, report.std.nmi)
    );
    Ok(())
}
