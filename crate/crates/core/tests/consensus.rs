use dnapix::channel::{amplify_and_sequence, ChannelParams, ReadSet};
use dnapix::consensus::{filter_reads, select_per_chunk, Strategy};
use dnapix::dna_code::{encode_indices_with, replica_rng, Codebook};
use dnapix::oligo::{chunk_and_format, Oligo, OligoLayout};
use rand::Rng;

fn corpus(chunks: usize, seed: u64) -> Vec<Oligo> {
    let book = Codebook::new(40).unwrap();
    let mut rng = replica_rng(seed, 50);
    let idx: Vec<u32> = (0..chunks * 73 / 3 + 5).map(|_| rng.random_range(1..=40)).collect();
    let nts = encode_indices_with(&idx, &book, &mut replica_rng(seed, 0)).unwrap();
    chunk_and_format(&nts[..chunks * 73], 1, &OligoLayout::default(), b"ATA").unwrap()
}

#[test]
fn noiseless_reads_survive_filter_and_selection() {
    let src = corpus(30, 1);
    let params = ChannelParams { p_sub: 0.0, p_ins: 0.0, p_del: 0.0, p_revcomp: 0.5, ..ChannelParams::noiseless(20.0, 3) };
    let reads = amplify_and_sequence(&src, &params).unwrap();
    let (kept, counts) = filter_reads(&reads, 91);
    assert_eq!(counts.total(), 0);
    assert_eq!(kept.len(), reads.len());
    for strategy in [Strategy::Frequency, Strategy::Random] {
        let report = select_per_chunk(&kept, &OligoLayout::default(), strategy, 9, 30);
        assert!(report.missing.is_empty());
        for (c, o) in report.chosen.iter().zip(&src) {
            assert_eq!(c.as_ref().unwrap().oligo.body, o.body);
        }
    }
}

#[test]
fn report_partitions_reads() {
    let src = corpus(40, 2);
    let params = ChannelParams { mean_coverage: 15.0, p_sub: 0.02, p_ins: 0.005, p_del: 0.005, ..Default::default() };
    let reads = amplify_and_sequence(&src, &params).unwrap();
    let (kept, filtered) = filter_reads(&reads, 91);
    let mut report = select_per_chunk(&kept, &OligoLayout::default(), Strategy::Frequency, 0, 40);
    report.rejected.merge(&filtered);
    assert_eq!(report.chosen_copies() + report.other_copies() + report.rejected.total(), reads.len());
}

#[test]
fn frequency_is_order_independent() {
    let src = corpus(20, 3);
    let params = ChannelParams { mean_coverage: 10.0, p_sub: 0.03, ..Default::default() };
    let reads = amplify_and_sequence(&src, &params).unwrap();
    let mut shuffled = reads.reads().to_vec();
    shuffled.reverse();
    let a = select_per_chunk(&reads, &OligoLayout::default(), Strategy::Frequency, 0, 20);
    let b = select_per_chunk(&ReadSet::from_reads(shuffled), &OligoLayout::default(), Strategy::Frequency, 5, 20);
    let key = |r: &dnapix::SelectionReport| {
        r.chosen.iter().map(|c| c.as_ref().map(|c| (c.oligo.body.clone(), c.support, c.group_size))).collect::<Vec<_>>()
    };
    assert_eq!(key(&a), key(&b));
}

#[test]
fn frequency_beats_random_under_heavy_noise() {
    let src = corpus(60, 4);
    let layout = OligoLayout::default();
    let (mut freq_bad, mut rand_bad) = (0, 0);
    for trial in 0..20 {
        let params = ChannelParams { mean_coverage: 30.0, p_sub: 0.02, p_ins: 0.002, p_del: 0.002, seed: trial, ..Default::default() };
        let reads = amplify_and_sequence(&src, &params).unwrap();
        let (kept, _) = filter_reads(&reads, 91);
        for (strategy, bad) in [(Strategy::Frequency, &mut freq_bad), (Strategy::Random, &mut rand_bad)] {
            let report = select_per_chunk(&kept, &layout, strategy, trial, 60);
            *bad += report
                .chosen
                .iter()
                .zip(&src)
                .filter(|(c, o)| c.as_ref().is_none_or(|c| c.oligo.body != o.body))
                .count();
        }
    }
    assert!(freq_bad < rand_bad, "frequency {freq_bad} vs random {rand_bad}");
}
