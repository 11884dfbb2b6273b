use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use digitsteg::codec::{self, build_digit_stream};
use digitsteg::harness::{self, Condition, CorpusConfig, IMAGES_CSV_HEADER, SIMILARITY_CSV_HEADER};
use digitsteg::steganalysis::TABLE_HEADER;
use digitsteg::{imageio, synth, CaesarKey, Error, PixelGrid};

fn key() -> CaesarKey {
    CaesarKey::new('k').unwrap()
}

fn write_covers(dir: &Path, n: usize, size: usize) {
    fs::create_dir_all(dir).unwrap();
    for i in 0..n {
        imageio::save_image(&synth::natural_cover(size, size, i as u64), dir.join(format!("{i}.bmp"))).unwrap();
    }
}

/// Near-black cover whose blue plane cycles through every last digit, so
/// the payload lands on green and lifts the luma of an almost dark image.
fn dark_cover(w: usize, h: usize) -> PixelGrid {
    let blue = (0..w * h).map(|i| (i % 10) as u8).collect();
    PixelGrid::from_planes(w, h, [blue, vec![0; w * h], vec![0; w * h]]).unwrap()
}

fn read_all(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_file())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

#[test]
fn runs_are_byte_identical_across_worker_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let covers = tmp.path().join("covers");
    write_covers(&covers, 6, 48);
    let mut outputs = Vec::new();
    for (run, workers) in [(0, 1), (1, 4)] {
        let out = tmp.path().join(format!("out{run}"));
        let mut cfg = CorpusConfig::new(&covers, &out, synth::filler_text(500), key());
        cfg.workers = workers;
        let report = harness::run_corpus(&cfg).unwrap();
        let rep = tmp.path().join(format!("rep{run}"));
        report.write(&rep).unwrap();
        outputs.push((read_all(&out), read_all(&rep)));
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0].0.len(), 6);
}

#[test]
fn partition_counts_cover_every_image() {
    let tmp = tempfile::tempdir().unwrap();
    let covers = tmp.path().join("covers");
    write_covers(&covers, 3, 40);
    // Too small for the message.
    imageio::save_image(&synth::natural_cover(10, 10, 9), covers.join("tiny.bmp")).unwrap();
    imageio::save_image(&dark_cover(40, 40), covers.join("dark.bmp")).unwrap();
    fs::write(covers.join("broken.bmp"), b"BM not really").unwrap();
    fs::write(covers.join("notes.txt"), b"ignored").unwrap();

    let cfg = CorpusConfig::new(&covers, tmp.path().join("out"), synth::filler_text(400), key());
    let report = harness::run_corpus(&cfg).unwrap();
    let s = &report.summary;
    assert_eq!(s.corpus_size, 6);
    assert_eq!(s.good.images + s.worst.images + s.failed, s.corpus_size);
    assert_eq!((s.failed, s.capacity_exceeded), (2, 1));
    let dark = report.rows.iter().find(|r| r.cover == "dark.bmp").unwrap();
    assert!(dark.ssim < 0.9, "{}", dark.ssim);
    assert_eq!(dark.condition, Condition::Worst);
    for r in &report.rows {
        assert_eq!(r.condition == Condition::Good, r.ssim >= 0.9);
    }
    assert_eq!(s.worst.images, report.rows.iter().filter(|r| r.ssim < 0.9).count());
}

#[test]
fn disabled_filter_tags_everything_good() {
    let tmp = tempfile::tempdir().unwrap();
    let covers = tmp.path().join("covers");
    fs::create_dir_all(&covers).unwrap();
    imageio::save_image(&dark_cover(40, 40), covers.join("dark.bmp")).unwrap();
    let mut cfg = CorpusConfig::new(&covers, tmp.path().join("out"), synth::filler_text(400), key());
    cfg.ssim_filter = None;
    let report = harness::run_corpus(&cfg).unwrap();
    assert_eq!((report.summary.good.images, report.summary.worst.images), (1, 0));
}

#[test]
fn stegos_decode_and_map_back_to_covers() {
    let tmp = tempfile::tempdir().unwrap();
    let covers = tmp.path().join("covers");
    write_covers(&covers, 4, 40);
    let out = tmp.path().join("out");
    let message = b"the quick brown fox".to_vec();
    let report = harness::run_corpus(&CorpusConfig::new(&covers, &out, message.clone(), key())).unwrap();

    let cover_stems: BTreeSet<String> =
        harness::list_bmps(&covers).unwrap().iter().map(|p| p.file_stem().unwrap().to_string_lossy().into()).collect();
    let mut seen = BTreeSet::new();
    for path in harness::list_bmps(&out).unwrap() {
        let stem = path.file_stem().unwrap().to_string_lossy().into_owned();
        let cover = stem.strip_suffix(harness::STEGO_SUFFIX).expect("stego suffix");
        assert!(cover_stems.contains(cover));
        assert!(seen.insert(cover.to_string()), "two stegos for {cover}");
        let stego = imageio::load_image(&path).unwrap();
        assert_eq!(codec::extract(&stego, key(), Default::default()).unwrap(), message);
    }
    assert_eq!(seen, cover_stems);
    let names: Vec<&str> = report.rows.iter().map(|r| r.cover.as_str()).collect();
    assert_eq!(names, ["0.bmp", "1.bmp", "2.bmp", "3.bmp"]);
}

#[test]
fn shared_directory_skips_previous_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("both");
    write_covers(&dir, 2, 40);
    let cfg = CorpusConfig::new(&dir, &dir, b"again".to_vec(), key());
    harness::run_corpus(&cfg).unwrap();
    let second = harness::run_corpus(&cfg).unwrap();
    assert_eq!(second.summary.corpus_size, 2);
}

#[test]
fn report_files_have_expected_layout() {
    let tmp = tempfile::tempdir().unwrap();
    let covers = tmp.path().join("covers");
    write_covers(&covers, 2, 40);
    let report = harness::run_corpus(&CorpusConfig::new(&covers, tmp.path().join("o"), b"hi".to_vec(), key())).unwrap();
    let images = report.images_csv();
    let sim = report.similarity_csv();
    let table = report.steganalysis_csv();
    assert_eq!(images.lines().next().unwrap(), IMAGES_CSV_HEADER);
    assert_eq!(sim.lines().next().unwrap(), SIMILARITY_CSV_HEADER);
    assert_eq!(table.lines().next().unwrap(), TABLE_HEADER);
    assert!(sim.lines().nth(1).unwrap().starts_with("0_fmatted.bmp,0.bmp,0.99"));
    for text in [&images, &sim, &table] {
        let cols = text.lines().next().unwrap().split(',').count();
        assert!(text.lines().all(|l| l.split(',').count() == cols));
        assert_eq!(text.lines().count(), 3);
    }
    let json: serde_json::Value = serde_json::from_str(&report.summary_json()).unwrap();
    assert_eq!(json["corpus_size"], 2);
    assert_eq!(json["good"]["detection_rate"], 0.0);
    assert!(json["worst"]["detection_rate"].is_null());
}

#[test]
fn empty_or_undecodable_directory_is_an_empty_corpus() {
    let tmp = tempfile::tempdir().unwrap();
    let covers = tmp.path().join("covers");
    fs::create_dir_all(&covers).unwrap();
    let cfg = CorpusConfig::new(&covers, tmp.path().join("out"), b"x".to_vec(), key());
    assert!(matches!(harness::run_corpus(&cfg), Err(Error::EmptyCorpus(_))));
    fs::write(covers.join("junk.bmp"), b"nope").unwrap();
    assert!(matches!(harness::run_corpus(&cfg), Err(Error::EmptyCorpus(_))));
}

#[test]
fn feature_export_schema() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("imgs");
    write_covers(&dir, 2, 32);
    let csv = tmp.path().join("f.csv");
    assert_eq!(harness::export_features(&dir, &csv).unwrap(), 2);
    let text = fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[0], harness::feature_header());
    let width = lines[0].split(',').count();
    assert_eq!(width, 2 + 3 * (4 + 10) + 5);
    for l in &lines[1..] {
        let cells: Vec<&str> = l.split(',').collect();
        assert_eq!(cells.len(), width);
        assert_eq!(cells[1], "?");
        assert!(cells[2..].iter().all(|c| c.parse::<f64>().is_ok()));
    }
    assert!(lines[1].starts_with("0.bmp,?,"));
}

#[test]
fn feature_export_of_missing_dir_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let r = harness::export_features(tmp.path().join("absent"), tmp.path().join("f.csv"));
    assert!(matches!(r, Err(Error::FileNotFound(_))));
}

#[test]
fn last_digit_bins_follow_the_embedded_stream() {
    let cover = synth::natural_cover(96, 96, 4);
    let payload = synth::filler_text(codec::capacity(96, 96));
    let record = codec::embed(&cover, &payload, key(), false).unwrap();
    let stream = build_digit_stream(&payload, key()).unwrap();

    let mut expected = [0usize; 10];
    for &d in stream.digits() {
        expected[usize::from(d)] += 1;
    }
    // Samples past the stream keep their cover digit.
    for &p in &record.stego.plane(record.channel)[stream.len()..] {
        expected[usize::from(p % 10)] += 1;
    }
    let n = record.stego.pixel_count() as f64;
    let features = harness::image_features(&record.stego);
    let bins = &features[record.channel.index() * 14 + 4..record.channel.index() * 14 + 14];
    for d in 0..10 {
        assert!((bins[d] - expected[d] as f64 / n).abs() < 1e-12, "digit {d}");
    }
}
