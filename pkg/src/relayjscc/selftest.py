"""Fast built-in invariant checks, runnable without any training.

Each check either returns quietly or raises AssertionError; ``run`` prints
one line per check and reports a process-style exit code.  The suite covers
the arithmetic that everything downstream depends on: signal dimensions,
the power constraint, channel statistics and equalization, complex packing,
codec shape contracts, the unit-gate equivalence of the class-conditioned
codec, fusion shapes and the loss identities.
"""

from __future__ import annotations

import math
import traceback

import torch

from . import channel
from .class_codec import ClassAidedDecoder, ClassAidedEncoder, force_unit_gates
from .codec import CodecSpec, Decoder, Encoder
from .config import ExperimentConfig, derive_dims
from .fusion import MutualAttention
from .pipeline import classification_loss, joint_loss, reconstruction_loss


def _tiny_config() -> ExperimentConfig:
    return ExperimentConfig(image_size=16, num_classes=2,
                            stage_blocks=[1, 1], stage_widths=[8, 16],
                            toy_per_class=4, toy_eval_per_class=2)


def check_dims() -> None:
    full = ExperimentConfig(dataset_name="stl10", image_size=96, num_classes=10,
                            stage_widths=[128, 256])
    d = derive_dims(full)
    assert d.n_patches == 576 and d.patch_len_real == 8, (d.n_patches, d.patch_len_real)
    small = ExperimentConfig()
    d = derive_dims(small)
    assert d.n_patches == (small.image_size // 4) ** 2
    assert d.patch_len_real % 2 == 0


def check_power_constraint() -> None:
    g = torch.Generator().manual_seed(1)
    raw = torch.randn(5, 9, 4, dtype=torch.complex64, generator=g)
    out = channel.power_normalize(raw, 1.0)
    per_sample = (out.values.abs() ** 2).mean(dim=(1, 2))
    assert torch.allclose(per_sample, torch.ones(5), atol=1e-6), per_sample


def check_equalizer() -> None:
    y = channel.ReceivedSignal(
        values=torch.full((2, 3), 1 + 1j, dtype=torch.complex64),
        gains=torch.full((2, 3), 0.5, dtype=torch.complex64),
        link=channel.LinkConfig(distance=1.0, exponent=2.0, fading="rayleigh",
                                noise_var=0.25))
    x_hat = channel.mmse_equalize(y, power=1.0)
    assert torch.allclose(x_hat, y.values, atol=1e-12)  # 0.5/(0.25+0.25) = 1
    g = torch.Generator().manual_seed(2)
    x = channel.power_normalize(
        torch.randn(4, 8, 4, dtype=torch.complex64, generator=g), 1.0)
    link = channel.LinkConfig(distance=0.7, exponent=2.0, fading="rayleigh",
                              noise_var=1e-12)
    rec = channel.apply_link(x, link, g)
    err = torch.linalg.vector_norm(channel.mmse_equalize(rec, 1.0) - x.values)
    assert float(err / torch.linalg.vector_norm(x.values)) < 1e-5


def check_packing() -> None:
    g = torch.Generator().manual_seed(3)
    x = torch.randn(2, 6, 3, dtype=torch.complex64, generator=g)
    back = channel.real_to_complex(channel.complex_to_real(x))
    assert torch.equal(back, x)


@torch.no_grad()
def check_codec_shapes() -> None:
    cfg = _tiny_config()
    spec = CodecSpec.from_config(cfg)
    torch.manual_seed(0)
    enc, dec = Encoder(spec), Decoder(spec)
    img = torch.rand(2, 3, cfg.image_size, cfg.image_size)
    sym = enc(img)
    assert sym.values.shape == (2, spec.dims.n_patches, spec.dims.complex_per_patch)
    power = (sym.values.abs() ** 2).mean(dim=(1, 2))
    assert torch.allclose(power, torch.ones(2), atol=1e-5)
    recon = dec(channel.complex_to_real(sym.values))
    assert recon.shape == img.shape
    assert float(recon.min()) >= 0.0 and float(recon.max()) <= 1.0


def check_unit_gate_equivalence() -> None:
    cfg = _tiny_config()
    spec = CodecSpec.from_config(cfg)
    torch.manual_seed(0)
    plain_enc, plain_dec = Encoder(spec), Decoder(spec)
    aided_enc = ClassAidedEncoder(spec, cfg.num_classes)
    aided_dec = ClassAidedDecoder(spec, cfg.num_classes)
    aided_enc.backbone.load_state_dict(plain_enc.state_dict())
    aided_dec.backbone.load_state_dict(plain_dec.state_dict())
    for gate in (aided_enc.gate1, aided_enc.gate2, aided_dec.gate):
        force_unit_gates(gate)
    img = torch.rand(2, 3, cfg.image_size, cfg.image_size)
    z = torch.tensor([0, 1])
    assert torch.equal(aided_enc(img, z).values, plain_enc(img).values)
    y = channel.complex_to_real(plain_enc(img).values)
    assert torch.equal(aided_dec(y, z), plain_dec(y))


def check_fusion_shapes() -> None:
    torch.manual_seed(0)
    fuse = MutualAttention(n_groups=6, patch_len=8)
    y_sd = torch.randn(3, 6, 8)
    y_rd = torch.randn(3, 6, 8)
    out = fuse(y_sd, y_rd)
    assert out.shape == (3, 6, 8)
    (out.sum()).backward()


def check_losses() -> None:
    k = 7
    logits = torch.zeros(5, k)
    labels = torch.arange(5) % k
    ce = classification_loss(logits, labels)
    assert abs(float(ce) - math.log(k)) < 1e-6
    a = torch.rand(2, 3, 4, 4)
    b = torch.rand(2, 3, 4, 4)
    total, mse, ce2 = joint_loss(a, b, logits[:2], labels[:2], 0.0)
    assert torch.equal(total, mse)
    assert abs(float(reconstruction_loss(a, a))) == 0.0
    assert float(ce2) > 0.0


def check_channel_determinism() -> None:
    x = channel.power_normalize(
        torch.randn(2, 4, 3, dtype=torch.complex64,
                    generator=torch.Generator().manual_seed(4)), 1.0)
    link = channel.LinkConfig(distance=0.5, exponent=2.0, fading="rayleigh",
                              noise_var=0.1)
    y1 = channel.apply_link(x, link, torch.Generator().manual_seed(11))
    y2 = channel.apply_link(x, link, torch.Generator().manual_seed(11))
    assert torch.equal(y1.values, y2.values)
    assert torch.equal(y1.gains, y2.gains)


CHECKS = [
    ("signal dimension arithmetic", check_dims),
    ("per-sample power constraint", check_power_constraint),
    ("mmse equalizer", check_equalizer),
    ("complex packing round-trip", check_packing),
    ("codec shape and power contract", check_codec_shapes),
    ("unit-gate codec equivalence", check_unit_gate_equivalence),
    ("fusion shape and gradients", check_fusion_shapes),
    ("loss identities", check_losses),
    ("channel determinism", check_channel_determinism),
]


def run(verbose: bool = True) -> int:
    failures = 0
    for name, fn in CHECKS:
        try:
            fn()
        except Exception:
            failures += 1
            if verbose:
                print(f"selftest: {name}: FAIL")
                traceback.print_exc()
        else:
            if verbose:
                print(f"selftest: {name}: ok")
    if verbose:
        print(f"selftest: {len(CHECKS) - failures}/{len(CHECKS)} checks passed")
    return 0 if failures == 0 else 1
