from django import forms

from .exceptions import ConfigurationError
from .grid import COMPRESSED, TWO_GRID, FillPattern
from .kernel import BlockSize
from .pipeline import BARRIER, RELAXED, PipelineConfig
from .decomp import Layout


def _parsed(parser, value):
    try:
        return parser(value)
    except ConfigurationError as exc:
        raise forms.ValidationError(str(exc))


class PipelineConfigForm(forms.Form):
    size = forms.IntegerField(min_value=1)
    teams = forms.IntegerField(min_value=1)
    team_size = forms.IntegerField(min_value=1)
    updates = forms.IntegerField(min_value=1)
    dl = forms.IntegerField(min_value=1)
    du = forms.IntegerField(min_value=1)
    dt = forms.IntegerField(min_value=0)
    block = forms.CharField(required=False)
    sync = forms.ChoiceField(choices=[(BARRIER, 'Barrier'), (RELAXED, 'Relaxed')])
    storage = forms.ChoiceField(choices=[(TWO_GRID, 'Two grids'), (COMPRESSED, 'Compressed')])
    pattern = forms.CharField(required=False)

    def clean_block(self):
        block = self.cleaned_data.get('block')
        return _parsed(BlockSize.parse, block) if block else None

    def clean_pattern(self):
        pattern = self.cleaned_data.get('pattern')
        return _parsed(FillPattern.parse, pattern) if pattern else None

    def clean(self):
        cleaned_data = super().clean()
        if self.errors:
            return cleaned_data
        try:
            cleaned_data['config'] = PipelineConfig(
                n=cleaned_data['teams'],
                t=cleaned_data['team_size'],
                T=cleaned_data['updates'],
                d_l=cleaned_data['dl'],
                d_u=cleaned_data['du'],
                d_t=cleaned_data['dt'],
                sync=cleaned_data['sync'],
                bs=cleaned_data['block'],
                storage=cleaned_data['storage'],
            )
        except ConfigurationError as exc:
            raise forms.ValidationError(str(exc))
        return cleaned_data


class DecompositionForm(forms.Form):
    ranks = forms.IntegerField(min_value=1)
    layout = forms.CharField()
    outer_steps = forms.IntegerField(min_value=1)
    batch = forms.IntegerField(min_value=1)
    scaling = forms.ChoiceField(choices=[('strong', 'Strong'), ('weak', 'Weak')])

    def clean_layout(self):
        return _parsed(Layout.parse, self.cleaned_data['layout'])

    def clean(self):
        cleaned_data = super().clean()
        layout = cleaned_data.get('layout')
        ranks = cleaned_data.get('ranks')
        if layout is not None and ranks is not None and layout.ranks != ranks:
            raise forms.ValidationError(f'layout {layout} holds {layout.ranks} ranks, not {ranks}')
        return cleaned_data


class ModelQueryForm(forms.Form):
    kind = forms.ChoiceField(choices=[('halo', 'Multi-layer halo'), ('speedup', 'Pipelined speedup')], required=False)
    sides = forms.TypedChoiceField(choices=[(1, '1'), (2, '2')], coerce=int, required=False, empty_value=1)

    def clean_kind(self):
        return self.cleaned_data['kind'] or 'halo'
