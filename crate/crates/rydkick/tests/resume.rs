mod common;

use rydkick::manifest::{Manifest, TaskRecord, TaskStatus};
use rydkick::{resume, run_experiment, Error, RunOptions};

#[test]
fn interrupted_scan_resumes_to_identical_files() {
    let cfg = common::small_scan(6);
    let full = tempfile::tempdir().unwrap();
    let reference = run_experiment(&cfg, full.path(), RunOptions { workers: 2 }).unwrap();

    // Emulate a kill after half the frequencies: copy the finished run,
    // then forget and delete the second half of the tasks and the analysis.
    let cut = tempfile::tempdir().unwrap();
    for (rel, bytes) in common::tree(full.path()) {
        let p = cut.path().join(&rel);
        std::fs::create_dir_all(p.parent().unwrap()).unwrap();
        std::fs::write(p, bytes).unwrap();
    }
    let mut m = reference.clone();
    let ids: Vec<String> = m.tasks.keys().cloned().collect();
    for id in ids.iter().skip(ids.len() / 2) {
        if id != rydkick::run::ANALYSIS_TASK {
            std::fs::remove_dir_all(cut.path().join("series").join(id)).unwrap();
        }
        m.tasks.insert(id.clone(), TaskRecord::pending());
    }
    std::fs::remove_dir_all(cut.path().join("analysis")).unwrap();
    m.save(cut.path()).unwrap();
    std::fs::write(cut.path().join("manifest.partial"), b"{").unwrap();

    let resumed = resume(cut.path(), Some(&cfg), RunOptions { workers: 3 }).unwrap();
    assert_eq!(resumed.without_timing(), reference.without_timing());
    assert_eq!(common::tree(cut.path()), common::tree(full.path()));
}

#[test]
fn complete_run_resumes_as_a_no_op() {
    let cfg = common::small_scan(2);
    let dir = tempfile::tempdir().unwrap();
    run_experiment(&cfg, dir.path(), RunOptions { workers: 1 }).unwrap();
    let before = std::fs::read(dir.path().join("manifest")).unwrap();
    resume(dir.path(), None, RunOptions { workers: 1 }).unwrap();
    assert_eq!(std::fs::read(dir.path().join("manifest")).unwrap(), before);
}

#[test]
fn corrupted_file_reruns_only_its_task() {
    let cfg = common::small_scan(3);
    let dir = tempfile::tempdir().unwrap();
    let first = run_experiment(&cfg, dir.path(), RunOptions { workers: 1 }).unwrap();
    let victim = dir.path().join("series/classical/1.455/series.txt");
    let good = std::fs::read(&victim).unwrap();
    std::fs::write(&victim, b"garbage").unwrap();
    let untouched = dir.path().join("series/quantum/1.45/series.txt");
    let stamp = std::fs::metadata(&untouched).unwrap().modified().unwrap();

    let after = resume(dir.path(), None, RunOptions { workers: 1 }).unwrap();
    assert_eq!(std::fs::read(&victim).unwrap(), good);
    assert_eq!(
        std::fs::metadata(&untouched).unwrap().modified().unwrap(),
        stamp
    );
    assert_eq!(after.without_timing(), first.without_timing());
    assert!(after
        .tasks
        .values()
        .all(|t| t.status == TaskStatus::Complete));
}

#[test]
fn changed_configuration_is_refused() {
    let cfg = common::small_scan(2);
    let dir = tempfile::tempdir().unwrap();
    run_experiment(&cfg, dir.path(), RunOptions { workers: 1 }).unwrap();
    let mut other = cfg.clone();
    other.classical.seed += 1;
    match resume(dir.path(), Some(&other), RunOptions { workers: 1 }) {
        Err(Error::ConfigMismatch(diff)) => assert!(diff.contains("seed = 12"), "{diff}"),
        r => panic!("{r:?}"),
    }
    let m = Manifest::load(dir.path()).unwrap();
    assert_eq!(m.config_hash, cfg.hash());
}
