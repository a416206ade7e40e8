from .noise_field import WhiteNoiseSample, DriftField, sample_white_noise, girsanov_shift, relative_entropy
