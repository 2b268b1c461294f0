"""Train the recurrent reconstructor on a small corpus and compare methods.

A scaled-down run (hidden 64, one layer, 200 training digits, 6.25%
sampling) that finishes in a couple of minutes on one CPU core. The full
reference configuration used by the acceptance suite is hidden 256, two
layers, 1000 digits, 20 epochs at 25% sampling.
Run from the repo root:  python3 demos/demo_rnn_training.py
"""

import numpy as np

from girnn import (
    CsProblem,
    MnistSet,
    TrainConfig,
    build_sequences,
    fista_reconstruct,
    generate_speckles,
    handwritten_digit_corpus,
    predict_image,
    psnr,
    reconstruct_correlation,
    save_checkpoint,
    select_test_targets,
    select_training_subset,
    train,
)

corpus = handwritten_digit_corpus()
train_pool = MnistSet(corpus.images[:1500], corpus.labels[:1500])
test_pool = MnistSet(corpus.images[1500:], corpus.labels[1500:])
train_set = select_training_subset(train_pool, 200, seed=13)
test_set = select_test_targets(test_pool, seed=13)

rate = 0.0625  # 49 illuminations
speckles = generate_speckles(seed=2024, count=49, height=28, width=28)
dataset = build_sequences(train_set, speckles, rate)

config = TrainConfig(hidden_size=64, layer_count=1, epochs=10, batch_size=32,
                     learning_rate=0.001, init_seed=7, shuffle_seed=11)
print(f"training: {len(dataset)} samples, {len(dataset[0][0])} steps each")
net, history = train(dataset, config)
for epoch, loss in history:
    print(f"  epoch {epoch:2d}: loss {loss:.5f}")

save_checkpoint(net, "demo_model.ckpt")
print("checkpoint written to demo_model.ckpt")

print(f"\nheld-out digits at {rate * 100:g}% sampling:")
print("digit   gi      cs     rnn")
gi_all, cs_all, rnn_all = [], [], []
for img, label in zip(test_set.images, test_set.labels):
    [(m, _)] = build_sequences(MnistSet([img], [label]), speckles, rate)
    gi = psnr(reconstruct_correlation(m), img)
    cs = psnr(fista_reconstruct(CsProblem.from_measurements(m)).image, img)
    rnn = psnr(predict_image(net, m), img)
    gi_all.append(gi)
    cs_all.append(cs)
    rnn_all.append(rnn)
    print(f"  {label}   {gi:5.2f}   {cs:5.2f}   {rnn:5.2f}")
print(f"mean   {np.mean(gi_all):5.2f}   {np.mean(cs_all):5.2f}   "
      f"{np.mean(rnn_all):5.2f}")
